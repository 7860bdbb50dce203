#pragma once

// Convex quasi-periodic curves in S^2 with positive hyperbolic monodromy:
// nondegeneracy and convexity tests, flag lift, limit points, the
// diagonal normal form (e^{t c1} : delta e^{t c2} : e^{t c3}) and interpolation.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "operslab/agd.hpp"
#include "operslab/error.hpp"
#include "operslab/linalg.hpp"
#include "operslab/periodic.hpp"

namespace operslab {

/// delta'' + 3 c2 delta' - (c2 - c1)(c3 - c2) delta at every node; negative everywhere iff convex.
inline RealSamples delta_convexity_defect(const DiagPositive& c, const RealSamples& delta) {
    const RealSamples d1 = derivative(delta);
    const RealSamples d2 = derivative(d1);
    const double gap = (c.c2() - c.c1()) * (c.c3() - c.c2());
    std::vector<double> out(delta.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = d2[k] + 3.0 * c.c2() * d1[k] - gap * delta[k];
    return RealSamples(std::move(out));
}

/// True iff c is in A_+, delta > 0, and the convexity inequality holds at every node.
inline bool delta_convexity(const DiagPositive& c, const RealSamples& delta) {
    if (!c.in_positive_chamber()) return false;
    for (double x : delta.values())
        if (!(x > 0.0)) return false;
    const RealSamples defect = delta_convexity_defect(c, delta);
    for (double x : defect.values())
        if (!(x < 0.0)) return false;
    return true;
}

/// Convex curve in diagonal normal form.
class ConvexCurveDelta {
public:
    ConvexCurveDelta(DiagPositive c, RealSamples delta) : c_(c), delta_(std::move(delta)) {
        if (!c_.in_positive_chamber()) throw Error(ErrorKind::domain, "exponents are not strictly increasing");
        for (std::size_t k = 0; k < delta_.size(); ++k)
            if (!(delta_[k] > 0.0)) throw Error(ErrorKind::domain, "delta not positive at node " + std::to_string(k));
        const RealSamples defect = delta_convexity_defect(c_, delta_);
        for (std::size_t k = 0; k < defect.size(); ++k)
            if (!(defect[k] < 0.0))
                throw Error(ErrorKind::domain, "convexity inequality fails at node " + std::to_string(k));
    }

    const DiagPositive& c() const { return c_; }
    const RealSamples& delta() const { return delta_; }

private:
    DiagPositive c_;
    RealSamples delta_;
};

/// Jets of (e^{t c1}, delta e^{t c2}, e^{t c3}) without any validation.
inline std::vector<Jet> delta_lift_jets(const DiagPositive& c, const RealSamples& delta) {
    const RealSamples d1 = derivative(delta);
    const RealSamples d2 = derivative(d1);
    const auto [c1, c2, c3] = c.exponents();
    std::vector<Jet> jets(delta.size());
    for (std::size_t k = 0; k < jets.size(); ++k) {
        const double t = delta.node(k);
        const double e1 = std::exp(c1 * t), e2 = std::exp(c2 * t), e3 = std::exp(c3 * t);
        jets[k].p = {e1, delta[k] * e2, e3};
        jets[k].d1 = {c1 * e1, (d1[k] + c2 * delta[k]) * e2, c3 * e3};
        jets[k].d2 = {c1 * c1 * e1, (d2[k] + 2.0 * c2 * d1[k] + c2 * c2 * delta[k]) * e2, c3 * c3 * e3};
    }
    return jets;
}

inline QuasiPeriodicCurve delta_to_curve(const ConvexCurveDelta& d) {
    return normalize_wronskian(delta_lift_jets(d.c(), d.delta()), d.c().group_element());
}

/// The standard curve (e^{t c1} : e^{t c2} : e^{t c3}).
inline QuasiPeriodicCurve standard_curve(const DiagPositive& c, std::size_t n = default_samples) {
    return delta_to_curve(ConvexCurveDelta(c, RealSamples(std::vector<double>(n, 1.0))));
}

struct NondegeneracyReport {
    bool ok;
    double min_wronskian;
};

inline NondegeneracyReport nondegeneracy_check(std::span<const Jet> jets) {
    double m = std::numeric_limits<double>::infinity();
    for (double w : wronskian(jets)) m = std::min(m, w);
    return {m > 1e-9, m};
}

inline NondegeneracyReport nondegeneracy_check(const QuasiPeriodicCurve& curve) {
    return nondegeneracy_check(curve.jets());
}

inline OrientedFlag flag_lift(const QuasiPeriodicCurve& curve, double t) {
    const Jet j = jet_at(curve, t);
    return gram_schmidt_flag(j.p, j.d1, j.d2);
}

// ---------------------------------------------------------------------------
// Brute-force convexity

inline constexpr std::uint64_t default_convexity_seed = 42;
inline constexpr std::size_t default_convexity_lines = 500;
inline constexpr double convexity_t_max = 8.0;

namespace detail {

/// Number of sign changes of a sequence; values within tol of zero are skipped.
inline int sign_changes(std::span<const double> f, double tol) {
    int changes = 0;
    int last = 0;
    for (double x : f) {
        if (std::abs(x) <= tol) continue;
        const int s = x > 0.0 ? 1 : -1;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

}  // namespace detail

/// Unit ray representatives of the deck-extended lift at t = k/n for |t| <= convexity_t_max.
inline std::vector<Vec3> extended_rays(std::span<const Vec3> period_points, const Mat3& mono) {
    const long n = static_cast<long>(period_points.size());
    const long periods = static_cast<long>(convexity_t_max);
    const Mat3 inv = inverse(mono);
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(2 * periods * n + 1));
    for (long m = -periods; m < periods; ++m) {
        std::vector<Vec3> block(period_points.begin(), period_points.end());
        const Mat3& step = m >= 0 ? mono : inv;
        for (long i = 0; i < std::abs(m); ++i)
            for (Vec3& v : block) {
                v = step * v;
                v = (1.0 / norm(v)) * v;
            }
        for (const Vec3& v : block) out.push_back((1.0 / norm(v)) * v);
    }
    Vec3 last = period_points[0];
    for (long i = 0; i < periods; ++i) {
        last = mono * last;
        last = (1.0 / norm(last)) * last;
    }
    out.push_back(last);
    return out;
}

/// Tests random great circles against the curve; false iff one meets the curve in more than two points.
/// Half of the circles are uniform, half are perturbed secants through two points of the curve
/// with log-uniform parameter gap.
inline bool convexity_check_bruteforce(std::span<const Vec3> period_points, const Mat3& mono,
                                       std::size_t lines = default_convexity_lines,
                                       std::uint64_t seed = default_convexity_seed) {
    const std::vector<Vec3> rays = extended_rays(period_points, mono);
    const long n = static_cast<long>(period_points.size());
    const long offset = static_cast<long>(convexity_t_max) * n;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<long> first(-n, 2 * n);
    std::uniform_real_distribution<double> log_gap(0.0, std::log(static_cast<double>(n / 2)));
    std::vector<double> f(rays.size());
    for (std::size_t line = 0; line < lines; ++line) {
        Vec3 w{gauss(rng), gauss(rng), gauss(rng)};
        if (line % 2 == 1) {
            const long a = first(rng);
            const long b = a + std::max(1L, std::lround(std::exp(log_gap(rng))));
            const Vec3 s = cross(rays[static_cast<std::size_t>(a + offset)], rays[static_cast<std::size_t>(b + offset)]);
            const double len = norm(s);
            if (len > 0.0) w = (1.0 / len) * s + 1e-3 * (1.0 / norm(w)) * w;
        }
        for (std::size_t k = 0; k < rays.size(); ++k) f[k] = dot(w, rays[k]);
        if (detail::sign_changes(f, 1e-12 * norm(w)) > 2) return false;
    }
    return true;
}

inline bool convexity_check_bruteforce(const QuasiPeriodicCurve& curve, std::size_t lines = default_convexity_lines,
                                       std::uint64_t seed = default_convexity_seed) {
    std::vector<Vec3> pts(curve.size());
    for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = curve[k].p;
    return convexity_check_bruteforce(pts, curve.monodromy().matrix(), lines, seed);
}

// ---------------------------------------------------------------------------
// Diagonal normal form

namespace detail {

/// Exponents of a diagonal positive monodromy in A_+.
inline DiagPositive diagonal_exponents(const Mat3& mono) {
    const double scale = max_abs(mono);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j && std::abs(mono(i, j)) > 1e-9 * scale)
                throw Error(ErrorKind::domain, "monodromy is not diagonal");
    for (int i = 0; i < 3; ++i)
        if (!(mono(i, i) > 0.0)) throw Error(ErrorKind::domain, "monodromy has a non-positive eigenvalue");
    const DiagPositive c(std::log(mono(0, 0)), std::log(mono(1, 1)));
    if (!c.in_positive_chamber()) throw Error(ErrorKind::domain, "monodromy exponents are not increasing");
    return c;
}

}  // namespace detail

/// Recovers (c, delta) from a convex curve with diagonal monodromy in A_+ lying in the
/// open positive octant (a lift with all coordinates negative is negated first).
inline ConvexCurveDelta curve_to_delta(const QuasiPeriodicCurve& curve) {
    const DiagPositive c = detail::diagonal_exponents(curve.monodromy().matrix());
    const auto [c1, c2, c3] = c.exponents();
    const std::size_t n = curve.size();
    const double sign = curve[0].p[0] < 0.0 ? -1.0 : 1.0;
    std::vector<double> sigma(n), speed(n), dvals(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec3 x = sign * curve[k].p;
        const Vec3 dx = sign * curve[k].d1;
        for (std::size_t i = 0; i < 3; ++i)
            if (!(x[i] > 0.0)) throw Error(ErrorKind::domain, "curve leaves the positive triangle at node " + std::to_string(k));
        const double s = std::log(x[2] / x[0]) / (c3 - c1);
        speed[k] = (dx[2] / x[2] - dx[0] / x[0]) / (c3 - c1);
        if (!(speed[k] > 0.0)) throw Error(ErrorKind::domain, "coordinate s is not monotone at node " + std::to_string(k));
        sigma[k] = s - curve.node(k);
        dvals[k] = (x[1] / x[0]) * std::exp(-s * (c2 - c1));
    }
    const PeriodicSpline sigma_s{RealSamples(sigma)};
    const PeriodicSpline speed_s{RealSamples(speed)};
    const PeriodicSpline delta_s{RealSamples(dvals)};
    std::vector<double> delta(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double target = static_cast<double>(j) / static_cast<double>(n);
        double t = target - sigma_s(target);
        for (int it = 0; it < 50; ++it) {
            const double r = t + sigma_s(t) - target;
            t -= r / speed_s(t);
            if (std::abs(r) < 1e-15) break;
        }
        delta[j] = delta_s(t);
    }
    return ConvexCurveDelta(c, RealSamples(std::move(delta)));
}

// ---------------------------------------------------------------------------
// Limits and the principal segment

struct PrincipalSegment {
    SpherePoint p_minus;
    SpherePoint p_plus;

    /// Great-circle arc from p_minus (u = 0) to p_plus (u = 1).
    SpherePoint operator()(double u) const {
        const Vec3 a = p_minus.vec(), b = p_plus.vec();
        const double omega = std::acos(std::clamp(dot(a, b), -1.0, 1.0));
        if (omega < 1e-15) return p_minus;
        return SpherePoint((std::sin((1.0 - u) * omega) / std::sin(omega)) * a + (std::sin(u * omega) / std::sin(omega)) * b);
    }
};

inline PrincipalSegment limits_and_segment(const QuasiPeriodicCurve& curve) {
    const auto spec = classify_positive_hyperbolic(curve.monodromy().matrix());
    if (!spec) throw Error(ErrorKind::domain, "monodromy is not positive hyperbolic");
    const TriangleSigns tri = triangle_of(SpherePoint(curve[0].p), spec->eigenframe);
    const Vec3 lo = static_cast<double>(tri.signs[0]) * spec->eigenframe.column(0);
    const Vec3 hi = static_cast<double>(tri.signs[2]) * spec->eigenframe.column(2);
    return {SpherePoint(lo), SpherePoint(hi)};
}

// ---------------------------------------------------------------------------
// Interpolation

/// Pointwise affine interpolation of (x2/x1, x3/x1) between two convex curves with the
/// same diagonal monodromy in A_+ lying in the same triangle.
inline QuasiPeriodicCurve convex_interpolate(const QuasiPeriodicCurve& g0, const QuasiPeriodicCurve& g1, double s) {
    if (g0.size() != g1.size()) throw Error(ErrorKind::invalid_argument, "curves sampled on different grids");
    const DiagPositive c0 = detail::diagonal_exponents(g0.monodromy().matrix());
    const DiagPositive c1 = detail::diagonal_exponents(g1.monodromy().matrix());
    for (std::size_t i = 0; i < 3; ++i)
        if (std::abs(c0.exponents()[i] - c1.exponents()[i]) > 1e-9)
            throw Error(ErrorKind::isomonodromy, "monodromies differ");
    const TriangleSigns t0 = triangle_of(SpherePoint(g0[0].p), Mat3::identity());
    const TriangleSigns t1 = triangle_of(SpherePoint(g1[0].p), Mat3::identity());
    if (t0.signs != t1.signs) throw Error(ErrorKind::domain, "curves lie in different triangles");
    if (s == 0.0) return g0;
    if (s == 1.0) return g1;

    struct Chart {
        double u, du, ddu, v, dv, ddv;
    };
    auto chart = [](const Jet& j) {
        const Vec3& x = j.p;
        const Vec3& dx = j.d1;
        const Vec3& ddx = j.d2;
        auto quotient = [&](std::size_t i) {
            const double q = x[i] / x[0];
            const double dq = (dx[i] - q * dx[0]) / x[0];
            const double ddq = (ddx[i] - 2.0 * dq * dx[0] - q * ddx[0]) / x[0];
            return std::array<double, 3>{q, dq, ddq};
        };
        const auto u = quotient(1), v = quotient(2);
        return Chart{u[0], u[1], u[2], v[0], v[1], v[2]};
    };

    const double e = c0.c1();
    const double sign = static_cast<double>(t0.signs[0]);
    std::vector<Jet> jets(g0.size());
    for (std::size_t k = 0; k < jets.size(); ++k) {
        const Chart a = chart(g0[k]), b = chart(g1[k]);
        auto mix = [s](double x, double y) { return (1.0 - s) * x + s * y; };
        const Vec3 q{1.0, mix(a.u, b.u), mix(a.v, b.v)};
        const Vec3 dq{0.0, mix(a.du, b.du), mix(a.dv, b.dv)};
        const Vec3 ddq{0.0, mix(a.ddu, b.ddu), mix(a.ddv, b.ddv)};
        const double w = sign * std::exp(e * g0.node(k));
        jets[k].p = w * q;
        jets[k].d1 = w * (e * q + dq);
        jets[k].d2 = w * (e * e * q + 2.0 * e * dq + ddq);
    }
    return normalize_wronskian(jets, g0.monodromy());
}

}  // namespace operslab
