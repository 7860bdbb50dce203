#pragma once

// JSON serialization of the domain types. Matrices are 9 numbers row-major, every
// sample array carries its count n, and malformed input raises a schema error that
// names the offending field.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "operslab/agd.hpp"
#include "operslab/annulus.hpp"
#include "operslab/curves.hpp"
#include "operslab/dsokolov.hpp"
#include "operslab/error.hpp"

namespace operslab::io {

using json = nlohmann::json;

/// Cursor into a JSON document that remembers its path for error messages.
class Field {
public:
    Field(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const json& value() const { return *j_; }
    const std::string& path() const { return path_; }

    [[noreturn]] void fail(const std::string& what) const { throw Error(ErrorKind::schema, path_ + ": " + what); }

    Field operator[](const char* key) const {
        if (!j_->is_object()) fail("expected an object");
        auto it = j_->find(key);
        if (it == j_->end()) throw Error(ErrorKind::schema, path_ + "." + key + ": missing field");
        return {*it, path_ + "." + key};
    }
    std::optional<Field> optional(const char* key) const {
        if (!j_->is_object()) fail("expected an object");
        auto it = j_->find(key);
        if (it == j_->end() || it->is_null()) return std::nullopt;
        return Field(*it, path_ + "." + key);
    }

    double number() const {
        if (!j_->is_number()) fail("expected a number");
        return j_->get<double>();
    }
    long integer() const {
        if (!j_->is_number_integer()) fail("expected an integer");
        return j_->get<long>();
    }
    std::string string() const {
        if (!j_->is_string()) fail("expected a string");
        return j_->get<std::string>();
    }
    std::vector<double> numbers(std::size_t expected) const {
        if (!j_->is_array()) fail("expected an array of numbers");
        if (j_->size() != expected)
            fail("expected " + std::to_string(expected) + " numbers, found " + std::to_string(j_->size()));
        std::vector<double> out(expected);
        for (std::size_t k = 0; k < expected; ++k) {
            const json& x = (*j_)[k];
            if (!x.is_number()) throw Error(ErrorKind::schema, path_ + "[" + std::to_string(k) + "]: expected a number");
            out[k] = x.get<double>();
        }
        return out;
    }

    /// The sample count n: a power of two, at least 16.
    std::size_t sample_count() const {
        const long n = integer();
        if (n < 16 || (n & (n - 1)) != 0) fail("sample count must be a power of two >= 16");
        return static_cast<std::size_t>(n);
    }

private:
    const json* j_;
    std::string path_;
};

inline void check_type(const Field& f, const char* type) {
    if (auto t = f.optional("type"); t && t->string() != type)
        t->fail("expected type \"" + std::string(type) + "\", found \"" + t->string() + "\"");
}

inline json matrix_json(const Mat3& m) { return json(std::vector<double>(m.a.begin(), m.a.end())); }

inline Mat3 matrix_from(const Field& f) {
    const auto v = f.numbers(9);
    Mat3 m;
    std::copy(v.begin(), v.end(), m.a.begin());
    return m;
}

inline json matrices_json(const std::vector<Mat3>& ms) {
    std::vector<double> flat;
    flat.reserve(9 * ms.size());
    for (const Mat3& m : ms) flat.insert(flat.end(), m.a.begin(), m.a.end());
    return flat;
}

inline std::vector<Mat3> matrices_from(const Field& f, std::size_t n) {
    const auto v = f.numbers(9 * n);
    std::vector<Mat3> out(n);
    for (std::size_t k = 0; k < n; ++k) std::copy(v.begin() + static_cast<long>(9 * k), v.begin() + static_cast<long>(9 * k + 9), out[k].a.begin());
    return out;
}

// ---------------------------------------------------------------------------

inline json to_json(const RealSamples& f) { return {{"n", f.size()}, {"values", f.values()}}; }

inline RealSamples samples_from(const Field& f) {
    const std::size_t n = f["n"].sample_count();
    return RealSamples(f["values"].numbers(n));
}

inline json to_json(const AgdOperator3& op) {
    return {{"type", "agd_operator3"}, {"n", op.size()}, {"a0", op.a0.values()}, {"a1", op.a1.values()}};
}

inline AgdOperator3 operator_from(const Field& f) {
    check_type(f, "agd_operator3");
    const std::size_t n = f["n"].sample_count();
    return {RealSamples(f["a0"].numbers(n)), RealSamples(f["a1"].numbers(n))};
}

inline json to_json(const HillOperator& h) { return {{"type", "hill_operator"}, {"n", h.q.size()}, {"q", h.q.values()}}; }

inline HillOperator hill_from(const Field& f) {
    check_type(f, "hill_operator");
    const std::size_t n = f["n"].sample_count();
    return {RealSamples(f["q"].numbers(n))};
}

inline json to_json(const QuasiPeriodicCurve& c) {
    std::vector<double> jets;
    jets.reserve(9 * c.size());
    for (const Jet& j : c.jets())
        for (const Vec3* v : {&j.p, &j.d1, &j.d2}) jets.insert(jets.end(), v->begin(), v->end());
    return {{"type", "quasi_periodic_curve"},
            {"n", c.size()},
            {"jets", jets},
            {"monodromy", matrix_json(c.monodromy().matrix())},
            {"wronskian", c.wronskian()}};
}

inline QuasiPeriodicCurve curve_from(const Field& f) {
    check_type(f, "quasi_periodic_curve");
    const std::size_t n = f["n"].sample_count();
    const auto flat = f["jets"].numbers(9 * n);
    std::vector<Jet> jets(n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < 3; ++i) {
            jets[k].p[i] = flat[9 * k + i];
            jets[k].d1[i] = flat[9 * k + 3 + i];
            jets[k].d2[i] = flat[9 * k + 6 + i];
        }
    const Field mono = f["monodromy"];
    const Mat3 m = matrix_from(mono);
    if (!(std::abs(det(m) - 1.0) <= GroupElem::det_tolerance)) mono.fail("monodromy must have determinant 1");
    if (auto w = f.optional("wronskian")) w->number();
    return {std::move(jets), GroupElem(m)};
}

inline json to_json(const LoopConnection& a) {
    return {{"type", "loop_connection"}, {"n", a.size()}, {"xi", matrices_json(a.xi().values())}};
}

inline LoopConnection connection_from(const Field& f) {
    check_type(f, "loop_connection");
    const std::size_t n = f["n"].sample_count();
    const Field xi = f["xi"];
    auto ms = matrices_from(xi, n);
    for (std::size_t k = 0; k < n; ++k)
        if (std::abs(trace(ms[k])) > AlgElem::trace_tolerance * std::max(1.0, max_abs(ms[k])))
            xi.fail("matrix " + std::to_string(k) + " is not traceless");
    return LoopConnection(MatSamples(std::move(ms)));
}

inline json to_json(const GaugeLoop& g) {
    json j = {{"type", "gauge_loop"}, {"n", g.size()}, {"g", matrices_json(g.g().values())}};
    j["winding"] = g.winding() ? json(*g.winding()) : json(nullptr);
    return j;
}

inline GaugeLoop gauge_from(const Field& f) {
    check_type(f, "gauge_loop");
    const std::size_t n = f["n"].sample_count();
    const Field gf = f["g"];
    auto ms = matrices_from(gf, n);
    for (std::size_t k = 0; k < n; ++k)
        if (!(std::abs(det(ms[k]) - 1.0) <= GroupElem::det_tolerance))
            gf.fail("matrix " + std::to_string(k) + " does not have determinant 1");
    return GaugeLoop(MatSamples(std::move(ms)));
}

inline json exponents_json(const DiagPositive& c) { return json::array({c.c1(), c.c2()}); }

inline DiagPositive exponents_from(const Field& f) {
    const auto v = f.numbers(2);
    return DiagPositive(v[0], v[1]);
}

inline json to_json(const ConvexCurveDelta& d) {
    return {{"type", "convex_curve_delta"}, {"c", exponents_json(d.c())}, {"n", d.delta().size()}, {"delta", d.delta().values()}};
}

inline ConvexCurveDelta delta_from(const Field& f) {
    check_type(f, "convex_curve_delta");
    const DiagPositive c = exponents_from(f["c"]);
    const std::size_t n = f["n"].sample_count();
    return {c, RealSamples(f["delta"].numbers(n))};
}

inline json to_json(const AnnulusGrid& g) { return {{"nx", g.nx}, {"ny", g.ny}, {"y_min", g.y_min}, {"y_max", g.y_max}}; }

inline AnnulusGrid grid_from(const Field& f) {
    const long nx = f["nx"].integer(), ny = f["ny"].integer();
    if (nx < 16 || (nx & (nx - 1)) != 0) f["nx"].fail("must be a power of two >= 16");
    if (ny < 17 || ny % 2 == 0) f["ny"].fail("must be odd and >= 17");
    const double lo = f["y_min"].number(), hi = f["y_max"].number();
    if (!(hi > lo)) f.fail("empty y interval");
    return {static_cast<std::size_t>(nx), static_cast<std::size_t>(ny), lo, hi};
}

inline json to_json(const AnnulusStructure& s) {
    return {{"type", "annulus_structure"},
            {"c", exponents_json(s.c())},
            {"delta_plus", to_json(s.delta_plus())},
            {"delta_minus", to_json(s.delta_minus())},
            {"grid", to_json(s.grid())}};
}

inline AnnulusStructure structure_from(const Field& f) {
    check_type(f, "annulus_structure");
    const DiagPositive c = exponents_from(f["c"]);
    AnnulusGrid grid;
    if (auto g = f.optional("grid")) grid = grid_from(*g);
    return {c, samples_from(f["delta_plus"]), samples_from(f["delta_minus"]), grid};
}

inline json to_json(const BoundaryArrow& a) {
    return {{"type", "arrow"}, {"target", to_json(a.target)}, {"source", to_json(a.source)}};
}

/// Arrow whose source defaults to `fallback` when omitted.
inline BoundaryArrow arrow_from(const Field& f, const ConvexCurveDelta& fallback) {
    check_type(f, "arrow");
    ConvexCurveDelta target = delta_from(f["target"]);
    if (auto s = f.optional("source")) return {std::move(target), delta_from(*s)};
    return {std::move(target), fallback};
}

// ---------------------------------------------------------------------------
// Files

inline json parse(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::schema, origin + ": " + e.what());
    }
}

inline json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::schema, path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

inline void write_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::invalid_argument, path + ": cannot write file");
    out << j.dump(1) << '\n';
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::invalid_argument, path + ": cannot write file");
    out << text;
}

}  // namespace operslab::io
