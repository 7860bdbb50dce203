#pragma once

// Loop connections xi(t) dt on the trivial SL(3) bundle over the circle, gauge
// loops, holonomy, tau-positivity and reduction to companion form.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "operslab/agd.hpp"
#include "operslab/error.hpp"
#include "operslab/linalg.hpp"
#include "operslab/periodic.hpp"

namespace operslab {

class LoopConnection {
public:
    explicit LoopConnection(MatSamples xi) : xi_(std::move(xi)) {
        for (std::size_t k = 0; k < xi_.size(); ++k) AlgElem check(xi_[k]);
    }
    std::size_t size() const { return xi_.size(); }
    const MatSamples& xi() const { return xi_; }
    const Mat3& operator[](std::size_t k) const { return xi_[k]; }

private:
    MatSamples xi_;
};

namespace detail {

inline double unwrapped_angle_change(const std::vector<double>& angles) {
    double total = 0.0;
    for (std::size_t k = 0; k < angles.size(); ++k) {
        double step = angles[(k + 1) % angles.size()] - angles[k];
        step -= 2.0 * std::numbers::pi * std::round(step / (2.0 * std::numbers::pi));
        total += step;
    }
    return total;
}

inline int winding_of_angles(const std::vector<double>& angles) {
    return static_cast<int>(std::lround(unwrapped_angle_change(angles) / (2.0 * std::numbers::pi)));
}

/// Winding of the rotation part of a loop fixing the ray of e1, or nothing if the
/// loop leaves that stabilizer.
inline std::optional<int> stabilizer_winding(const MatSamples& g) {
    std::vector<double> angles(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Mat3& m = g[k];
        const double scale = std::max(1.0, max_abs(m));
        if (!(m(0, 0) > 0.0) || std::abs(m(1, 0)) > 1e-9 * scale || std::abs(m(2, 0)) > 1e-9 * scale)
            return std::nullopt;
        const Mat3 q = gram_schmidt_flag(m.column(0), m.column(1), m.column(2)).frame();
        angles[k] = std::atan2(q(2, 1), q(1, 1));
    }
    return winding_of_angles(angles);
}

}  // namespace detail

class GaugeLoop {
public:
    explicit GaugeLoop(MatSamples g) : g_(std::move(g)) {
        for (std::size_t k = 0; k < g_.size(); ++k) GroupElem check(g_[k]);
        winding_ = detail::stabilizer_winding(g_);
    }
    static GaugeLoop identity(std::size_t n) { return GaugeLoop(MatSamples(std::vector<Mat3>(n, Mat3::identity()))); }

    std::size_t size() const { return g_.size(); }
    const MatSamples& g() const { return g_; }
    const Mat3& operator[](std::size_t k) const { return g_[k]; }
    /// Net winding of the SO(2) part when the loop stabilizes the e1 ray.
    std::optional<int> winding() const { return winding_; }

private:
    MatSamples g_;
    std::optional<int> winding_;
};

inline LoopConnection companion_connection(const AgdOperator3& op) { return LoopConnection(companion_samples(op)); }

/// Ad_g xi - g' g^{-1}.
inline LoopConnection gauge_act(const GaugeLoop& g, const LoopConnection& a) {
    if (g.size() != a.size()) throw Error(ErrorKind::invalid_argument, "gauge loop and connection grids differ");
    const MatSamples dg = derivative(g.g());
    std::vector<Mat3> out(a.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const Mat3 inv = inverse(g[k]);
        out[k] = g[k] * a[k] * inv - dg[k] * inv;
        out[k](2, 2) = -(out[k](0, 0) + out[k](1, 1));
    }
    return LoopConnection(MatSamples(std::move(out)));
}

/// Product of gauge loops, (g h)(t) = g(t) h(t).
inline GaugeLoop operator*(const GaugeLoop& g, const GaugeLoop& h) {
    if (g.size() != h.size()) throw Error(ErrorKind::invalid_argument, "gauge loop grids differ");
    std::vector<Mat3> out(g.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = GroupElem::normalized(g[k] * h[k]).matrix();
    return GaugeLoop(MatSamples(std::move(out)));
}

/// Spline generator through the connection refined spectrally onto the RK4 stage grid.
class LoopGenerator {
public:
    explicit LoopGenerator(const LoopConnection& a) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                entries_[static_cast<std::size_t>(3 * i + j)] =
                    PeriodicSpline(refine(component(a.xi(), i, j), CompanionGenerator::refinement));
    }
    Mat3 operator()(double t) const {
        Mat3 m;
        for (std::size_t k = 0; k < 9; ++k) m.a[k] = entries_[k](t);
        return m;
    }

private:
    std::array<PeriodicSpline, 9> entries_;
};

/// R with R' = R xi, R(0) = I, so that h = R^{-1} solves h' h^{-1} = -xi.
inline Transport connection_transport(const LoopConnection& a) {
    return integrate_transport(LoopGenerator(a), a.size(), /*right=*/true);
}

/// h(1) for h' h^{-1} = -xi, h(0) = I; equals exp(-xi0) for a constant connection.
inline GroupElem holonomy(const LoopConnection& a) { return GroupElem::normalized(inverse(connection_transport(a).end)); }

/// Monodromy of the associated curve h^{-1} e1, that is h(1)^{-1}.
inline GroupElem curve_monodromy(const LoopConnection& a) { return GroupElem::normalized(connection_transport(a).end); }

namespace detail {

/// w0 = e1, w_{i+1} = w_i' + xi w_i, stored as the columns of a periodic matrix.
inline MatSamples jet_sequence(const LoopConnection& a) {
    std::vector<Mat3> w1(a.size());
    std::array<std::vector<double>, 3> comps;
    for (auto& c : comps) c.resize(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        const Vec3 v = a[k].column(0);
        for (std::size_t i = 0; i < 3; ++i) comps[i][k] = v[i];
    }
    const std::array<RealSamples, 3> d{derivative(RealSamples(comps[0])), derivative(RealSamples(comps[1])),
                                       derivative(RealSamples(comps[2]))};
    std::vector<Mat3> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        const Vec3 w1k = a[k].column(0);
        const Vec3 w2k = Vec3{d[0][k], d[1][k], d[2][k]} + a[k] * w1k;
        out[k] = Mat3::from_columns({1.0, 0.0, 0.0}, w1k, w2k);
    }
    return MatSamples(std::move(out));
}

}  // namespace detail

struct TauPositivity {
    bool ok = false;
    int winding = 0;
    double min_wronskian = 0.0;
};

inline TauPositivity tau_positivity(const LoopConnection& a) {
    const MatSamples w = detail::jet_sequence(a);
    TauPositivity out;
    out.min_wronskian = det(w[0]);
    for (std::size_t k = 0; k < w.size(); ++k) out.min_wronskian = std::min(out.min_wronskian, det(w[k]));
    if (!(out.min_wronskian > 1e-9)) return out;
    std::vector<double> angles(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        const Mat3 q = gram_schmidt_flag(w[k].column(0), w[k].column(1), w[k].column(2)).frame();
        angles[k] = std::atan2(q(2, 1), q(1, 1));
    }
    out.winding = detail::winding_of_angles(angles);
    out.ok = out.winding == 0;
    return out;
}

/// The curve h^{-1} e1 with jets h^{-1} w_k, rescaled to unit Wronskian.
inline QuasiPeriodicCurve curve_of_connection(const LoopConnection& a) {
    const MatSamples w = detail::jet_sequence(a);
    for (std::size_t k = 0; k < w.size(); ++k)
        if (!(det(w[k]) > 1e-9))
            throw Error(ErrorKind::not_positive, "jet Wronskian " + std::to_string(det(w[k])) + " at node " +
                                                     std::to_string(k));
    const Transport r = connection_transport(a);
    std::vector<Jet> raw(a.size());
    for (std::size_t k = 0; k < raw.size(); ++k) raw[k] = Jet::from_frame(r.nodes[k] * w[k]);
    return normalize_wronskian(raw, GroupElem::normalized(r.end));
}

struct DsNormalization {
    AgdOperator3 op;
    GaugeLoop gauge;
    double periodicity_defect;
};

/// Companion form of a tau-positive connection together with the gauge loop
/// g = F^{-1} R taking it there (F the canonical jet frame, R the transport).
inline DsNormalization ds_normalize(const LoopConnection& a) {
    static constexpr double periodicity_tolerance = 1e-6;
    const TauPositivity pos = tau_positivity(a);
    if (!pos.ok)
        throw Error(ErrorKind::domain, "connection is not tau-positive (winding " + std::to_string(pos.winding) + ")");
    const QuasiPeriodicCurve curve = curve_of_connection(a);
    AgdOperator3 op = operator_of_curve(curve);
    const Transport r = connection_transport(a);
    std::vector<Mat3> g(a.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = GroupElem::normalized(inverse(curve[k].frame()) * r.nodes[k]).matrix();
    // The companion transport from F(0) gives F(1) independently of the stored monodromy.
    const Transport rc = integrate_transport(CompanionGenerator(op), op.size(), /*right=*/true);
    const Mat3 f1 = curve[0].frame() * rc.end;
    const double defect = max_abs(inverse(f1) * r.end - g[0]);
    if (!(defect <= periodicity_tolerance))
        throw Error(ErrorKind::convention, "gauge loop periodicity defect " + std::to_string(defect));
    return {std::move(op), GaugeLoop(MatSamples(std::move(g))), defect};
}

/// [[0, -a1, -a0 + a1'], [1, 0, 0], [0, 1, 0]]: every free entry in the first row.
inline LoopConnection first_row_form(const AgdOperator3& op) {
    const RealSamples da1 = derivative(op.a1);
    std::vector<Mat3> out(op.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        Mat3 m = shift_matrix();
        m(0, 1) = -op.a1[k];
        m(0, 2) = -op.a0[k] + da1[k];
        out[k] = m;
    }
    return LoopConnection(MatSamples(std::move(out)));
}

inline LoopConnection first_row_reduce(const LoopConnection& a) { return first_row_form(ds_normalize(a).op); }

/// Rotation loop Q(t) from the Gram-Schmidt frames of the jet sequence.
inline GaugeLoop frame_loop(const LoopConnection& a) {
    const MatSamples w = detail::jet_sequence(a);
    std::vector<Mat3> q(w.size());
    for (std::size_t k = 0; k < w.size(); ++k)
        q[k] = gram_schmidt_flag(w[k].column(0), w[k].column(1), w[k].column(2)).frame();
    return GaugeLoop(MatSamples(std::move(q)));
}

struct IntermediateForm {
    LoopConnection connection;
    double max_abs_corner;   ///< largest |xi_31| after the frame gauge
    double min_subdiagonal;  ///< smallest of xi_21, xi_32 over all nodes
    bool ok;
};

/// Gauges by Q^{-1}; the result has zero (3,1) entry and positive subdiagonal.
inline IntermediateForm intermediate_form(const LoopConnection& a) {
    const GaugeLoop q = frame_loop(a);
    std::vector<Mat3> inv(q.size());
    for (std::size_t k = 0; k < inv.size(); ++k) inv[k] = transpose(q[k]);
    LoopConnection b = gauge_act(GaugeLoop(MatSamples(std::move(inv))), a);
    double corner = 0.0, sub = b[0](1, 0);
    for (std::size_t k = 0; k < b.size(); ++k) {
        corner = std::max(corner, std::abs(b[k](2, 0)));
        sub = std::min({sub, b[k](1, 0), b[k](2, 1)});
    }
    const double scale = std::max(1.0, max_abs(b.xi()[0]));
    return {std::move(b), corner, sub, corner <= 1e-6 * scale && sub > 1e-9};
}

}  // namespace operslab
