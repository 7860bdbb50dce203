#pragma once

// Third-order operators L = d^3 + a1 d + a0 on the circle, Hill operators
// d^2 + q, and the correspondence between operators and nondegenerate
// quasi-periodic curves in S^2.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "operslab/error.hpp"
#include "operslab/linalg.hpp"
#include "operslab/periodic.hpp"

namespace operslab {

/// L = d^3 + a1 d + a0 with periodic coefficients sampled on a common grid.
struct AgdOperator3 {
    RealSamples a0;
    RealSamples a1;

    AgdOperator3(RealSamples a0_, RealSamples a1_) : a0(std::move(a0_)), a1(std::move(a1_)) {
        if (a0.size() != a1.size()) throw Error(ErrorKind::invalid_argument, "coefficient grids differ");
    }
    std::size_t size() const { return a0.size(); }

    /// Constant-coefficient operator on n samples.
    static AgdOperator3 constant(double c0, double c1, std::size_t n = default_samples) {
        return {RealSamples(std::vector<double>(n, c0)), RealSamples(std::vector<double>(n, c1))};
    }
};

/// d^2 + q.
struct HillOperator {
    RealSamples q;
};

/// Value, first and second derivative of a lift R -> R^3 at one parameter value.
struct Jet {
    Vec3 p{};
    Vec3 d1{};
    Vec3 d2{};

    Mat3 frame() const { return Mat3::from_columns(p, d1, d2); }
    static Jet from_frame(const Mat3& f) { return {f.column(0), f.column(1), f.column(2)}; }
};

inline double wronskian(const Jet& j) { return det3(j.p, j.d1, j.d2); }

inline std::vector<double> wronskian(std::span<const Jet> jets) {
    std::vector<double> w(jets.size());
    std::transform(jets.begin(), jets.end(), w.begin(), [](const Jet& j) { return wronskian(j); });
    return w;
}

/// Determinant of a K x K derivative matrix; rows[i][j] is the i-th derivative of the j-th function.
template <std::size_t K>
double wronskian(const std::array<std::array<double, K>, K>& rows) {
    Eigen::Matrix<double, static_cast<int>(K), static_cast<int>(K)> m;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return m.determinant();
}

/// Nondegenerate quasi-periodic curve: sampled 2-jets of a lift with constant Wronskian,
/// together with its monodromy (lift(t+1) = mono * lift(t)).
class QuasiPeriodicCurve {
public:
    static constexpr double wronskian_rel_tolerance = 1e-6;

    QuasiPeriodicCurve(std::vector<Jet> jets, GroupElem mono) : jets_(std::move(jets)), mono_(std::move(mono)) {
        const std::size_t n = jets_.size();
        if (n < 16 || (n & (n - 1)) != 0)
            throw Error(ErrorKind::invalid_argument, "jet count must be a power of two >= 16");
        const auto w = operslab::wronskian(jets_);
        double mean = 0.0;
        for (double x : w) mean += x;
        mean /= static_cast<double>(n);
        if (!(mean > 1e-9)) throw Error(ErrorKind::degeneracy, "Wronskian is not positive");
        for (std::size_t k = 0; k < n; ++k)
            if (!(std::abs(w[k] - mean) <= wronskian_rel_tolerance * mean))
                throw Error(ErrorKind::degeneracy, "Wronskian not constant at node " + std::to_string(k));
        wronskian_ = mean;
    }

    std::size_t size() const { return jets_.size(); }
    double node(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(jets_.size()); }
    const std::vector<Jet>& jets() const { return jets_; }
    const Jet& operator[](std::size_t k) const { return jets_[k]; }
    const GroupElem& monodromy() const { return mono_; }
    double wronskian() const { return wronskian_; }

    /// Jet at node index k extended to all integers by quasi-periodicity.
    Jet extended(long k) const {
        const long n = static_cast<long>(jets_.size());
        long m = k >= 0 ? k / n : -((-k + n - 1) / n);
        const Jet& j = jets_[static_cast<std::size_t>(k - m * n)];
        if (m == 0) return j;
        Mat3 g = Mat3::identity();
        const Mat3 step = m > 0 ? mono_.matrix() : inverse(mono_.matrix());
        for (long i = 0; i < std::abs(m); ++i) g = step * g;
        return {g * j.p, g * j.d1, g * j.d2};
    }

private:
    std::vector<Jet> jets_;
    GroupElem mono_;
    double wronskian_ = 0.0;
};

/// Multiplies a lift by a positive periodic function lambda, updating the jets exactly.
inline std::vector<Jet> rescale_lift(std::span<const Jet> jets, const RealSamples& lambda) {
    if (lambda.size() != jets.size()) throw Error(ErrorKind::invalid_argument, "rescaling grid mismatch");
    const RealSamples l1 = derivative(lambda);
    const RealSamples l2 = derivative(l1);
    std::vector<Jet> out(jets.size());
    for (std::size_t k = 0; k < jets.size(); ++k) {
        const Jet& j = jets[k];
        out[k].p = lambda[k] * j.p;
        out[k].d1 = l1[k] * j.p + lambda[k] * j.d1;
        out[k].d2 = l2[k] * j.p + 2.0 * l1[k] * j.d1 + lambda[k] * j.d2;
    }
    return out;
}

/// Canonical lift: rescales by W^{-1/3} so that the Wronskian is identically one.
/// The raw Wronskian must be positive and periodic (det mono = 1).
/// A Wronskian that is constant to rounding is rescaled by a constant.
inline QuasiPeriodicCurve normalize_wronskian(std::span<const Jet> raw, const GroupElem& mono) {
    static constexpr double constant_rel_tolerance = 1e-10;
    const auto w = wronskian(raw);
    double mean = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (!(w[k] > 1e-9))
            throw Error(ErrorKind::degeneracy, "Wronskian " + std::to_string(w[k]) + " at node " + std::to_string(k));
        mean += w[k];
    }
    mean /= static_cast<double>(w.size());
    const bool constant = std::all_of(w.begin(), w.end(), [&](double x) {
        return std::abs(x - mean) <= constant_rel_tolerance * mean;
    });
    std::vector<double> lam(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) lam[k] = std::cbrt(1.0 / (constant ? mean : w[k]));
    if (constant) {
        std::vector<Jet> out(raw.begin(), raw.end());
        for (Jet& j : out) j = {lam[0] * j.p, lam[0] * j.d1, lam[0] * j.d2};
        return QuasiPeriodicCurve(std::move(out), mono);
    }
    return QuasiPeriodicCurve(rescale_lift(raw, RealSamples(std::move(lam))), mono);
}

/// g . gamma; the monodromy becomes g mu g^{-1}.
inline QuasiPeriodicCurve act(const GroupElem& g, const QuasiPeriodicCurve& curve) {
    std::vector<Jet> jets(curve.size());
    const Mat3& m = g.matrix();
    for (std::size_t k = 0; k < jets.size(); ++k) jets[k] = {m * curve[k].p, m * curve[k].d1, m * curve[k].d2};
    return {std::move(jets), g * curve.monodromy() * g.inverse()};
}

// ---------------------------------------------------------------------------
// Operators and their companion connections

inline Mat3 companion_from_coefficients(double a0, double a1) {
    Mat3 m = shift_matrix();
    m(0, 2) = -a0;
    m(1, 2) = -a1;
    return m;
}

/// Companion (Drinfeld-Sokolov) matrix of L at an arbitrary parameter.
inline Mat3 companion_matrix(const AgdOperator3& op, double t) {
    return companion_from_coefficients(eval(op.a0, t), eval(op.a1, t));
}

inline MatSamples companion_samples(const AgdOperator3& op) {
    std::vector<Mat3> v(op.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = companion_from_coefficients(op.a0[k], op.a1[k]);
    return MatSamples(std::move(v));
}

/// Spline-interpolated companion generator used by the integrators.
/// Splines through the coefficients, refined spectrally onto the grid of an RK4
/// transport with four steps per node (so every stage lands on a spline knot).
class CompanionGenerator {
public:
    static constexpr std::size_t refinement = 8;
    explicit CompanionGenerator(const AgdOperator3& op)
        : a0_(refine(op.a0, refinement)), a1_(refine(op.a1, refinement)) {}
    Mat3 operator()(double t) const { return companion_from_coefficients(a0_(t), a1_(t)); }

private:
    PeriodicSpline a0_;
    PeriodicSpline a1_;
};

struct FundamentalFrame {
    std::vector<GroupElem> frames;  ///< h(t_k), with h' = -xi h and h(0) = I
    GroupElem mono;                 ///< h(1)^{-1}: lift(t+1) = mono * lift(t)
};

inline FundamentalFrame fundamental_frame(const AgdOperator3& op) {
    const Transport r = integrate_transport(CompanionGenerator(op), op.size(), /*right=*/true);
    FundamentalFrame out{{}, GroupElem::normalized(r.end)};
    out.frames.reserve(op.size());
    for (const Mat3& x : r.nodes) out.frames.emplace_back(inverse(x));
    return out;
}

/// The curve h(t)^{-1} e1 with its analytic jets, normalized to unit Wronskian.
inline QuasiPeriodicCurve curve_of_operator(const AgdOperator3& op) {
    const Transport r = integrate_transport(CompanionGenerator(op), op.size(), /*right=*/true);
    std::vector<Jet> jets(op.size());
    for (std::size_t k = 0; k < jets.size(); ++k) jets[k] = Jet::from_frame(r.nodes[k]);
    return normalize_wronskian(jets, GroupElem::normalized(r.end));
}

namespace detail {

/// Third derivative by an eighth-order central difference of the second derivative,
/// using the quasi-periodic extension across t = 0 and t = 1.
inline std::vector<Vec3> third_derivatives_fd(const QuasiPeriodicCurve& curve) {
    static constexpr std::array<double, 4> coeff{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    const long n = static_cast<long>(curve.size());
    const double inv_h = static_cast<double>(n);
    std::vector<Vec3> out(curve.size());
    for (long k = 0; k < n; ++k) {
        Vec3 acc{0.0, 0.0, 0.0};
        for (long s = 1; s <= 4; ++s) {
            const double c = coeff[static_cast<std::size_t>(s - 1)];
            acc = acc + c * (curve.extended(k + s).d2 - curve.extended(k - s).d2);
        }
        out[static_cast<std::size_t>(k)] = inv_h * acc;
    }
    return out;
}

inline std::optional<Mat3> real_log(const Mat3& m) {
    try {
        const Mat3 l = logm(m);
        if (max_abs(expm(l) - m) > 1e-12 * std::max(1.0, max_abs(m))) return std::nullopt;
        return l;
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace detail

/// Third derivative of the lift. When the monodromy has a real logarithm L, the
/// factor exp(-tL) x''(t) is periodic and is differentiated spectrally; otherwise an
/// eighth-order finite difference is used.
inline std::vector<Vec3> third_derivatives(const QuasiPeriodicCurve& curve) {
    const auto log_mono = detail::real_log(curve.monodromy().matrix());
    if (!log_mono) return detail::third_derivatives_fd(curve);
    const std::size_t n = curve.size();
    std::vector<Mat3> twist(n);
    std::array<std::vector<double>, 3> y;
    for (auto& comp : y) comp.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        twist[k] = expm(curve.node(k) * *log_mono);
        const Vec3 v = inverse(twist[k]) * curve[k].d2;
        for (std::size_t i = 0; i < 3; ++i) y[i][k] = v[i];
    }
    std::array<RealSamples, 3> dy{derivative(RealSamples(y[0])), derivative(RealSamples(y[1])),
                                  derivative(RealSamples(y[2]))};
    std::vector<Vec3> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = *log_mono * curve[k].d2 + twist[k] * Vec3{dy[0][k], dy[1][k], dy[2][k]};
    return out;
}

/// Operator of a nondegenerate curve, from the cofactors of the bordered 4x4 Wronskian
/// L(u) = -W4(u, x1, x2, x3) / W3(x1, x2, x3).
inline AgdOperator3 operator_of_curve(const QuasiPeriodicCurve& curve) {
    const auto d3 = third_derivatives(curve);
    std::vector<double> a0(curve.size()), a1(curve.size());
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const Jet& j = curve[k];
        const double w = det3(j.p, j.d1, j.d2);
        if (!(w > 1e-9)) throw Error(ErrorKind::degeneracy, "Wronskian below threshold at node " + std::to_string(k));
        a0[k] = -det3(j.d1, j.d2, d3[k]) / w;
        a1[k] = det3(j.p, j.d2, d3[k]) / w;
    }
    return {RealSamples(std::move(a0)), RealSamples(std::move(a1))};
}

/// Monodromy recomputed from the jets: the frame at t = 0 transported by the operator of the curve.
inline GroupElem recompute_monodromy(const QuasiPeriodicCurve& curve) {
    const AgdOperator3 op = operator_of_curve(curve);
    const Transport r = integrate_transport(CompanionGenerator(op), op.size(), /*right=*/true);
    const Mat3 f0 = curve[0].frame();
    return GroupElem::normalized(f0 * r.end * inverse(f0));
}

// ---------------------------------------------------------------------------
// Hill operators

/// d^2 + q  |->  d^3 + q d + q'/2.
inline AgdOperator3 hill_embed(const HillOperator& h) { return {0.5 * derivative(h.q), h.q}; }

struct HillSolutions {
    std::vector<std::array<double, 4>> values;  ///< (u1, u2, u1', u2') at the nodes, Wronskian one
    std::array<double, 4> mono;                 ///< 2x2 monodromy, row-major
};

/// Fundamental system of u'' + q u = 0 with u1(0) = 1, u1'(0) = 0, u2(0) = 0, u2'(0) = 1.
inline HillSolutions hill_solutions(const RealSamples& q) {
    const PeriodicSpline qs(q);
    auto gen = [&qs](double t) {
        Mat3 m;
        m(0, 1) = -qs(t);
        m(1, 0) = 1.0;
        return m;
    };
    const Transport r = integrate_transport(gen, q.size(), /*right=*/true);
    HillSolutions out;
    out.values.reserve(q.size());
    for (const Mat3& x : r.nodes) out.values.push_back({x(0, 0), x(1, 0), x(0, 1), x(1, 1)});
    out.mono = {r.end(0, 0), r.end(0, 1), r.end(1, 0), r.end(1, 1)};
    return out;
}

/// Veronese composition (u1^2 : u1 u2 : u2^2) of the fundamental system of d^2 + q/4.
/// Products of solutions of u'' + Q u = 0 solve y''' + 4Q y' + 2Q' y = 0, so this is a
/// curve over hill_embed(h).
inline QuasiPeriodicCurve veronese_lift(const HillOperator& h) {
    const RealSamples quarter = 0.25 * h.q;
    const HillSolutions sol = hill_solutions(quarter);
    std::vector<Jet> jets(h.q.size());
    for (std::size_t k = 0; k < jets.size(); ++k) {
        const auto [u1, u2, v1, v2] = sol.values[k];
        const double qk = quarter[k];
        jets[k].p = {u1 * u1, u1 * u2, u2 * u2};
        jets[k].d1 = {2.0 * u1 * v1, v1 * u2 + u1 * v2, 2.0 * u2 * v2};
        jets[k].d2 = {2.0 * v1 * v1 - 2.0 * qk * u1 * u1, 2.0 * v1 * v2 - 2.0 * qk * u1 * u2,
                      2.0 * v2 * v2 - 2.0 * qk * u2 * u2};
    }
    const auto [m00, m01, m10, m11] = sol.mono;
    Mat3 sym2;
    sym2(0, 0) = m00 * m00;
    sym2(0, 1) = 2.0 * m00 * m01;
    sym2(0, 2) = m01 * m01;
    sym2(1, 0) = m00 * m10;
    sym2(1, 1) = m00 * m11 + m01 * m10;
    sym2(1, 2) = m01 * m11;
    sym2(2, 0) = m10 * m10;
    sym2(2, 1) = 2.0 * m10 * m11;
    sym2(2, 2) = m11 * m11;
    return normalize_wronskian(jets, GroupElem::normalized(sym2));
}

// ---------------------------------------------------------------------------
// Interpolation and reparametrization

/// Jet at an arbitrary parameter by degree-7 Lagrange interpolation of the
/// quasi-periodically extended samples.
inline Jet jet_at(const QuasiPeriodicCurve& curve, double t) {
    const double n = static_cast<double>(curve.size());
    const double x = t * n;
    const auto base = static_cast<long>(std::floor(x));
    const double frac = x - static_cast<double>(base);
    if (frac == 0.0) return curve.extended(base);
    Jet out;
    for (long i = -3; i <= 4; ++i) {
        double w = 1.0;
        for (long j = -3; j <= 4; ++j)
            if (j != i) w *= (frac - static_cast<double>(j)) / static_cast<double>(i - j);
        const Jet s = curve.extended(base + i);
        out.p = out.p + w * s.p;
        out.d1 = out.d1 + w * s.d1;
        out.d2 = out.d2 + w * s.d2;
    }
    return out;
}

/// gamma(t + p(t)) for a periodic p with p' > -1, renormalized to unit Wronskian.
inline QuasiPeriodicCurve reparametrize(const QuasiPeriodicCurve& curve, const RealSamples& p) {
    if (p.size() != curve.size()) throw Error(ErrorKind::invalid_argument, "reparametrization grid mismatch");
    const RealSamples p1 = derivative(p);
    const RealSamples p2 = derivative(p1);
    std::vector<Jet> jets(curve.size());
    for (std::size_t k = 0; k < jets.size(); ++k) {
        const double phi1 = 1.0 + p1[k];
        if (!(phi1 > 0.0)) throw Error(ErrorKind::invalid_argument, "reparametrization is not orientation preserving");
        const Jet j = jet_at(curve, curve.node(k) + p[k]);
        jets[k].p = j.p;
        jets[k].d1 = phi1 * j.d1;
        jets[k].d2 = p2[k] * j.d1 + phi1 * phi1 * j.d2;
    }
    return normalize_wronskian(jets, curve.monodromy());
}

// ---------------------------------------------------------------------------
// Isomonodromic deformation

namespace detail {

inline std::array<double, 8> sl3_coordinates(const Mat3& x) {
    return {x(0, 1), x(0, 2), x(1, 0), x(1, 2), x(2, 0), x(2, 1), x(0, 0), x(1, 1)};
}

/// Coefficient perturbation spanned by low Fourier modes of a0 and a1.
struct ModePerturbation {
    static constexpr int harmonics = 3;
    static constexpr int per_coefficient = 2 * harmonics + 1;
    static constexpr int count = 2 * per_coefficient;

    static double basis(int j, double t) {
        if (j == 0) return 1.0;
        const int h = (j + 1) / 2;
        const double arg = 2.0 * std::numbers::pi * h * t;
        return (j % 2 == 1) ? std::cos(arg) : std::sin(arg);
    }
    static double value(const Eigen::VectorXd& p, int coefficient, double t) {
        double s = 0.0;
        for (int j = 0; j < per_coefficient; ++j) s += p(coefficient * per_coefficient + j) * basis(j, t);
        return s;
    }
};

}  // namespace detail

/// Curves f(h_s, .) with f(mu, .) = gamma and monodromy h_s interpolating from mu(gamma)
/// to h_target along mu exp(s log(mu^{-1} h_target)). Each member is obtained by perturbing
/// the operator (the companion connection) so that the transport of the initial frame of gamma
/// has the prescribed holonomy; members are returned for s = k/steps, k = 0..steps.
inline std::vector<QuasiPeriodicCurve> isomonodromic_family(const QuasiPeriodicCurve& curve,
                                                             const GroupElem& target, std::size_t steps) {
    using detail::ModePerturbation;
    if (steps == 0) throw Error(ErrorKind::invalid_argument, "at least one step required");
    const std::size_t n = curve.size();
    const AgdOperator3 base = operator_of_curve(curve);
    const PeriodicSpline a0(base.a0), a1(base.a1);
    const Mat3 f0 = curve[0].frame();
    const Mat3 f0_inv = inverse(f0);

    auto transport = [&](const Eigen::VectorXd& p) {
        auto gen = [&](double t) {
            return companion_from_coefficients(a0(t) + ModePerturbation::value(p, 0, t),
                                               a1(t) + ModePerturbation::value(p, 1, t));
        };
        return integrate_transport(gen, n, /*right=*/true);
    };
    auto holonomy = [&](const Transport& r) { return f0 * r.end * f0_inv; };

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(ModePerturbation::count);
    const Mat3 mu_base = holonomy(transport(zero));
    const Mat3 direction = logm(inverse(curve.monodromy().matrix()) * target.matrix());

    std::vector<QuasiPeriodicCurve> family;
    family.reserve(steps + 1);
    family.push_back(curve);
    if (max_abs(direction) <= 1e-13) {
        for (std::size_t k = 1; k <= steps; ++k) family.push_back(curve);
        return family;
    }

    auto residual = [&](const Mat3& hol, const Mat3& goal_inv) -> Eigen::Matrix<double, 8, 1> {
        const auto v = detail::sl3_coordinates(logm(goal_inv * hol));
        return Eigen::Map<const Eigen::Matrix<double, 8, 1>>(v.data());
    };

    Eigen::VectorXd p = zero;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double s = static_cast<double>(k) / static_cast<double>(steps);
        const Mat3 goal = mu_base * expm(s * direction);
        const Mat3 goal_inv = inverse(goal);
        bool converged = false;
        Transport r = transport(p);
        for (int iter = 0; iter < 25; ++iter) {
            const Eigen::Matrix<double, 8, 1> res = residual(holonomy(r), goal_inv);
            if (res.norm() < 1e-12) {
                converged = true;
                break;
            }
            constexpr double fd = 1e-7;
            Eigen::Matrix<double, 8, Eigen::Dynamic> jac(8, ModePerturbation::count);
            for (int j = 0; j < ModePerturbation::count; ++j) {
                Eigen::VectorXd q = p;
                q(j) += fd;
                jac.col(j) = (residual(holonomy(transport(q)), goal_inv) - res) / fd;
            }
            const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(res);
            if (!step.allFinite()) break;
            p -= step;
            r = transport(p);
        }
        if (!converged)
            throw Error(ErrorKind::deformation, "holonomy not reached at step " + std::to_string(k));

        std::vector<Jet> jets(n);
        for (std::size_t i = 0; i < n; ++i) jets[i] = Jet::from_frame(f0 * r.nodes[i]);
        const Mat3 hol = holonomy(r);
        try {
            family.emplace_back(std::move(jets), GroupElem::normalized(hol));
        } catch (const Error& e) {
            throw Error(ErrorKind::deformation, "member " + std::to_string(k) + " degenerate: " + e.what());
        }
    }
    return family;
}

}  // namespace operslab
