#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "operslab/operslab.hpp"

using namespace operslab;
using io::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_schema = 2;
constexpr int exit_domain = 3;
constexpr int exit_verification = 4;

std::vector<double> parse_list(const std::string& text, std::size_t count, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::invalid_argument, flag + ": cannot parse \"" + item + "\" as a number");
        }
    }
    if (out.size() != count)
        throw Error(ErrorKind::invalid_argument, flag + ": expected " + std::to_string(count) + " comma-separated numbers");
    return out;
}

DiagPositive parse_exponents(const std::string& text, const std::string& flag) {
    const auto v = parse_list(text, 3, flag);
    const DiagPositive c = DiagPositive::from_triple(v[0], v[1], v[2]);
    if (!c.in_positive_chamber()) throw Error(ErrorKind::domain, flag + ": exponents must satisfy c1 < c2 < c3");
    return c;
}

void emit(const json& j, const std::string& out) {
    if (out.empty())
        std::cout << j.dump(1) << '\n';
    else
        io::write_file(out, j);
}

json spectrum_json(const Mat3& m) {
    json eig = json::array();
    auto ev = eigenvalues(m);
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
    for (const auto& z : ev) eig.push_back({{"re", z.real()}, {"im", z.imag()}});
    json out = {{"eigenvalues", eig}, {"matrix", io::matrix_json(m)}};
    if (const auto spec = classify_positive_hyperbolic(m)) {
        out["positive_hyperbolic"] = true;
        out["exponents"] = spec->exponents.exponents();
    } else {
        out["positive_hyperbolic"] = false;
    }
    return out;
}

/// Curve from a curve document, an operator document or a convex_curve_delta document.
QuasiPeriodicCurve load_curve(const std::string& path) {
    const json j = io::read_file(path);
    const io::Field f(j, "$");
    const std::string type = j.is_object() && j.contains("type") && j["type"].is_string() ? j["type"].get<std::string>() : "";
    if (type == "agd_operator3" || (type.empty() && j.is_object() && j.contains("a0")))
        return curve_of_operator(io::operator_from(f));
    if (type == "convex_curve_delta" || (type.empty() && j.is_object() && j.contains("delta")))
        return delta_to_curve(io::delta_from(f));
    return io::curve_from(f);
}

/// Boundary profile from {n, values} samples or a convex_curve_delta document.
RealSamples load_profile(const std::string& path, const DiagPositive& c) {
    const json j = io::read_file(path);
    const io::Field f(j, "$");
    if (j.is_object() && j.contains("delta")) {
        const ConvexCurveDelta d = io::delta_from(f);
        if (std::abs(d.c().c1() - c.c1()) > 1e-12 || std::abs(d.c().c2() - c.c2()) > 1e-12)
            throw Error(ErrorKind::isomonodromy, path + ": profile exponents differ from --c");
        return d.delta();
    }
    return io::samples_from(f);
}

std::uint64_t convexity_seed() {
    const char* env = std::getenv("OPERSLAB_SEED");
    if (!env || !*env) return default_convexity_seed;
    try {
        std::size_t used = 0;
        const unsigned long long s = std::stoull(env, &used);
        if (env[used] != '\0') throw std::invalid_argument(env);
        return s;
    } catch (const std::exception&) {
        throw Error(ErrorKind::invalid_argument, "OPERSLAB_SEED must be a non-negative integer");
    }
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::schema:
        case ErrorKind::invalid_argument: return exit_schema;
        default: return exit_domain;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical toolkit for AGD operators, convex curves and projective annuli"};
    app.require_subcommand(1);
    int status = exit_ok;

    std::string in, out, gauge_out, arrow_path, side = "plus", c_text, zeta_text, plus_path, minus_path;
    std::size_t nx = 256, ny = 129, lines = default_convexity_lines;
    int twist_index = 1;
    double t = 0.0, eps = 0.5, fd = 1e-4;
    bool log_scale = false;

    auto* op2curve = app.add_subcommand("op2curve", "Normalized curve of an AGD operator");
    op2curve->add_option("--in", in, "operator JSON")->required();
    op2curve->add_option("--out", out, "curve JSON (stdout if omitted)");
    op2curve->callback([&] { emit(io::to_json(curve_of_operator(io::operator_from(io::Field(io::read_file(in), "$")))), out); });

    auto* curve2op = app.add_subcommand("curve2op", "AGD operator of a nondegenerate curve");
    curve2op->add_option("--in", in, "curve JSON")->required();
    curve2op->add_option("--out", out, "operator JSON (stdout if omitted)");
    curve2op->callback([&] { emit(io::to_json(operator_of_curve(io::curve_from(io::Field(io::read_file(in), "$")))), out); });

    auto* mono = app.add_subcommand("monodromy", "Monodromy eigenvalues and chamber classification");
    mono->add_option("--in", in, "operator JSON")->required();
    mono->callback([&] {
        const AgdOperator3 op = io::operator_from(io::Field(io::read_file(in), "$"));
        emit(spectrum_json(fundamental_frame(op).mono.matrix()), "");
    });

    auto* ds = app.add_subcommand("ds-normalize", "Companion normal form of a positive loop connection");
    ds->add_option("--in", in, "loop connection JSON")->required();
    ds->add_option("--out", out, "operator JSON (stdout if omitted)");
    ds->add_option("--emit-gauge", gauge_out, "write the normalizing gauge loop");
    ds->callback([&] {
        const DsNormalization r = ds_normalize(io::connection_from(io::Field(io::read_file(in), "$")));
        if (!gauge_out.empty()) io::write_file(gauge_out, io::to_json(r.gauge));
        emit(io::to_json(r.op), out);
        std::cerr << "periodicity defect " << r.periodicity_defect << '\n';
    });

    auto* annulus = app.add_subcommand("annulus", "Annulus structures");
    annulus->require_subcommand(1);
    auto* build = annulus->add_subcommand("build", "Structure from exponents and two boundary profiles");
    build->add_option("--c", c_text, "exponents c1,c2,c3")->required();
    build->add_option("--delta-plus", plus_path, "profile JSON for the + boundary")->required();
    build->add_option("--delta-minus", minus_path, "profile JSON for the - boundary")->required();
    build->add_option("--nx", nx, "grid nodes in x");
    build->add_option("--ny", ny, "grid nodes in y");
    build->add_option("--out", out, "structure JSON (stdout if omitted)");
    build->callback([&] {
        const DiagPositive c = parse_exponents(c_text, "--c");
        const AnnulusStructure s(c, load_profile(plus_path, c), load_profile(minus_path, c), AnnulusGrid(nx, ny, -1.0, 1.0));
        emit(io::to_json(s), out);
    });
    auto* psi = annulus->add_subcommand("psi", "Boundary AGD operators");
    psi->add_option("--in", in, "structure JSON")->required();
    psi->add_option("--out", out, "output JSON (stdout if omitted)");
    psi->callback([&] {
        const BoundaryOperators b = boundary_psi(io::structure_from(io::Field(io::read_file(in), "$")));
        emit({{"plus", io::to_json(b.plus)}, {"minus", io::to_json(b.minus)}}, out);
    });

    auto* groupoid = app.add_subcommand("groupoid", "Boundary groupoid");
    groupoid->require_subcommand(1);
    auto* act = groupoid->add_subcommand("act", "Replace one boundary along an arrow");
    act->add_option("--in", in, "structure JSON")->required();
    act->add_option("--arrow", arrow_path, "arrow JSON")->required();
    act->add_option("--side", side, "boundary side")->check(CLI::IsMember({"plus", "minus"}));
    act->add_option("--out", out, "structure JSON (stdout if omitted)");
    act->callback([&] {
        const AnnulusStructure s = io::structure_from(io::Field(io::read_file(in), "$"));
        const int sgn = side == "plus" ? 1 : -1;
        const json a = io::read_file(arrow_path);
        emit(io::to_json(groupoid_act(io::arrow_from(io::Field(a, "$"), s.boundary(sgn)), s, sgn)), out);
    });

    auto* twist = app.add_subcommand("twist", "Twist flow diagnostics on the principal annulus");
    twist->add_option("--in-c", c_text, "exponents c1,c2,c3")->required();
    twist->add_option("--i", twist_index, "twist index")->check(CLI::IsMember({1, 2}));
    twist->add_option("--t", t, "flow time");
    twist->add_option("--eps", eps, "bump half-width");
    twist->add_option("--nx", nx, "grid nodes in x");
    twist->add_option("--ny", ny, "grid nodes in y");
    twist->callback([&] {
        const DiagPositive c = parse_exponents(c_text, "--in-c");
        const AnnulusGrid grid(nx, ny, -1.0, 1.0);
        const AnnulusConnection b = twist_flow(principal_annulus_connection(c, grid), twist_index, t, BumpFunction(eps));
        const HolonomyHamiltonians h = holonomy_hamiltonians(b);
        emit({{"flatness_residual", max_abs(curvature(b))},
              {"holonomy", spectrum_json(row_transport(b, midline_row(grid)))},
              {"h1", h.h1},
              {"h2", h.h2}},
             "");
    });

    auto* verify = app.add_subcommand("verify-moment-map", "Finite-difference check of the moment-map identity");
    verify->add_option("--c", c_text, "exponents c1,c2,c3")->required();
    verify->add_option("--zeta", zeta_text, "traceless variation z1,z2,z3")->required();
    verify->add_option("--eps", eps, "bump half-width");
    verify->add_option("--fd", fd, "central-difference step");
    verify->callback([&] {
        const DiagPositive c = parse_exponents(c_text, "--c");
        const auto z = parse_list(zeta_text, 3, "--zeta");
        const MomentMapCheck r = verify_moment_map(c, {z[0], z[1], z[2]}, BumpFunction(eps), AnnulusGrid{}, fd);
        std::printf("%-4s %20s %20s %20s\n", "i", "pairing", "-dH/dt", "-tr(xi zeta)");
        for (std::size_t i = 0; i < 2; ++i)
            std::printf("%-4zu %20.12f %20.12f %20.12f\n", i + 1, r.lhs[i], r.rhs[i], r.expected[i]);
        std::printf("max_rel_err %.3e\n", r.max_rel_err);
        if (!(r.max_rel_err <= 1e-4)) status = exit_verification;
    });

    auto* plot = app.add_subcommand("plot", "SVG figures in the affine chart x1 = 1");
    plot->require_subcommand(1);
    for (const char* kind : {"curve", "annulus", "triangles"}) {
        auto* sub = plot->add_subcommand(kind, std::string("plot ") + kind);
        sub->add_option("--in", in, "input JSON")->required();
        sub->add_option("--out", out, "SVG file")->required();
        sub->add_flag("--log", log_scale, "log-scale axes");
        const std::string k = kind;
        sub->callback([&, k] {
            std::string doc;
            if (k == "annulus")
                doc = svg::plot_annulus(io::structure_from(io::Field(io::read_file(in), "$")), log_scale);
            else if (k == "curve")
                doc = svg::plot_curve(load_curve(in), log_scale);
            else
                doc = svg::plot_triangles(load_curve(in), log_scale);
            io::write_text(out, doc);
        });
    }

    auto* convex = app.add_subcommand("convexity", "Line-intersection convexity oracle (seed from OPERSLAB_SEED)");
    convex->add_option("--in", in, "curve, operator or delta JSON")->required();
    convex->add_option("--lines", lines, "random lines to test");
    convex->callback([&] {
        const std::uint64_t seed = convexity_seed();
        const QuasiPeriodicCurve curve = load_curve(in);
        emit({{"convex", convexity_check_bruteforce(curve, lines, seed)}, {"lines", lines}, {"seed", seed}}, "");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_schema;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_domain;
    }
    return status;
}
