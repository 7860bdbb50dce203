#pragma once

// Atiyah-Bott pairing on sampled annulus connections, the infinitesimal Goldman
// twists of the principal annulus, holonomy Hamiltonians and the finite-difference
// check of the moment-map identity.

#include <array>
#include <cmath>
#include <string>

#include "operslab/annulus.hpp"
#include "operslab/dsokolov.hpp"
#include "operslab/error.hpp"
#include "operslab/linalg.hpp"

namespace operslab {

/// Tangent vector alpha = ax dx + ay dy to the space of connections.
struct GridOneForm {
    AnnulusGrid grid;
    GridField ax;
    GridField ay;
};

inline GridOneForm tangent_of(const AnnulusConnection& a) { return {a.grid(), a.ax(), a.ay()}; }

/// Quintic smoothstep from 0 at y = -eps to 1 at y = eps.
class BumpFunction {
public:
    explicit BumpFunction(double eps = 0.5) : eps_(eps) {
        if (!(eps > 0.0 && eps < 0.9)) throw Error(ErrorKind::invalid_argument, "bump width must lie in (0, 0.9)");
    }
    double eps() const { return eps_; }

    double operator()(double y) const {
        if (y <= -eps_) return 0.0;
        if (y >= eps_) return 1.0;
        const double s = (y + eps_) / (2.0 * eps_);
        return s * s * s * (s * (6.0 * s - 15.0) + 10.0);
    }
    double derivative(double y) const {
        if (y <= -eps_ || y >= eps_) return 0.0;
        const double s = (y + eps_) / (2.0 * eps_);
        return 30.0 * s * s * (1.0 - s) * (1.0 - s) / (2.0 * eps_);
    }

private:
    double eps_;
};

/// Integral of tr(ax by - ay bx): trapezoid in y, mean over the periodic x nodes.
inline double atiyah_bott_pair(const GridOneForm& a, const GridOneForm& b) {
    if (!(a.grid == b.grid)) throw Error(ErrorKind::grid_mismatch, "one-forms live on different grids");
    const AnnulusGrid& g = a.grid;
    if (a.ax.size() != g.size() || a.ay.size() != g.size() || b.ax.size() != g.size() || b.ay.size() != g.size())
        throw Error(ErrorKind::grid_mismatch, "one-form size does not match its grid");
    double total = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j) {
        double row = 0.0;
        for (std::size_t i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            row += trace_pairing(a.ax[k], b.ay[k]) - trace_pairing(a.ay[k], b.ax[k]);
        }
        const double w = (j == 0 || j + 1 == g.ny) ? 0.5 : 1.0;
        total += w * row / static_cast<double>(g.nx);
    }
    return total * g.dy();
}

/// alpha_1 = (xi_1 - y/2 E21 + E31) chi'(y) dy and alpha_2 = (xi_2 - y E21) chi'(y) dy.
inline GridOneForm twist_tangent(int i, const BumpFunction& chi, const AnnulusGrid& grid) {
    if (i != 1 && i != 2) throw Error(ErrorKind::invalid_argument, "twist index must be 1 or 2");
    if (!(grid.y_min < -chi.eps() && chi.eps() < grid.y_max))
        throw Error(ErrorKind::invalid_argument, "bump support leaves the grid");
    GridOneForm out{grid, GridField(grid.size()), GridField(grid.size())};
    for (std::size_t j = 0; j < grid.ny; ++j) {
        const double y = grid.y(j);
        Mat3 m = i == 1 ? cartan_xi1() - 0.5 * y * Mat3::unit(1, 0) + Mat3::unit(2, 0)
                        : cartan_xi2() - y * Mat3::unit(1, 0);
        m *= chi.derivative(y);
        for (std::size_t k = 0; k < grid.nx; ++k) out.ay[grid.index(k, j)] = m;
    }
    return out;
}

/// A + t alpha_i; the model requires the result to stay flat.
inline AnnulusConnection twist_flow(const AnnulusConnection& a, int i, double t, const BumpFunction& chi) {
    static constexpr double flatness_tolerance = 1e-6;
    const GridOneForm alpha = twist_tangent(i, chi, a.grid());
    GridField ay = a.ay();
    for (std::size_t k = 0; k < ay.size(); ++k) ay[k] += t * alpha.ay[k];
    AnnulusConnection out(a.grid(), a.ax(), std::move(ay));
    const double residual = max_abs(curvature(out));
    if (residual > flatness_tolerance)
        throw Error(ErrorKind::model_mismatch, "twisted connection has curvature " + std::to_string(residual));
    return out;
}

/// Monodromy of the x-transport along grid row j (curve convention).
inline Mat3 row_transport(const AnnulusConnection& a, std::size_t j) {
    return connection_transport(LoopConnection(row_pullback(a, j))).end;
}

inline std::size_t midline_row(const AnnulusGrid& g) {
    for (std::size_t j = 0; j < g.ny; ++j)
        if (std::abs(g.y(j)) <= 1e-12 * (g.y_max - g.y_min)) return j;
    throw Error(ErrorKind::invalid_argument, "y = 0 is not a grid node");
}

struct HolonomyHamiltonians {
    double h1;
    double h2;
    DiagPositive log_holonomy;
};

/// H_i = tr(log(Hol) xi_i) for the midline holonomy with ascending exponents.
inline HolonomyHamiltonians holonomy_hamiltonians(const AnnulusConnection& a) {
    const Mat3 hol = row_transport(a, midline_row(a.grid()));
    const auto spec = classify_positive_hyperbolic(hol);
    if (!spec) throw Error(ErrorKind::domain, "midline holonomy is not positive hyperbolic");
    const Mat3 l = spec->exponents.log_matrix();
    return {trace_pairing(l, cartan_xi1()), trace_pairing(l, cartan_xi2()), spec->exponents};
}

struct MomentMapCheck {
    std::array<double, 2> lhs;
    std::array<double, 2> rhs;
    std::array<double, 2> expected;  ///< -tr(xi_i zeta)
    double max_rel_err;
};

/// Compares the pairing of alpha_i with dA/dt against -dH_i/dt along c + t zeta.
inline MomentMapCheck verify_moment_map(const DiagPositive& c, const std::array<double, 3>& zeta, const BumpFunction& chi,
                                        const AnnulusGrid& grid = {}, double fd_step = 1e-4) {
    const double scale = std::max({1.0, std::abs(zeta[0]), std::abs(zeta[1]), std::abs(zeta[2])});
    if (std::abs(zeta[0] + zeta[1] + zeta[2]) > 1e-12 * scale)
        throw Error(ErrorKind::invalid_argument, "variation must be traceless");
    if (!(fd_step > 0.0)) throw Error(ErrorKind::invalid_argument, "finite-difference step must be positive");
    auto shifted = [&](double t) {
        const DiagPositive d(c.c1() + t * zeta[0], c.c2() + t * zeta[1]);
        if (!d.in_positive_chamber()) throw Error(ErrorKind::domain, "variation leaves the positive chamber");
        return d;
    };
    const DiagPositive cp = shifted(fd_step), cm = shifted(-fd_step);
    if (!c.in_positive_chamber()) throw Error(ErrorKind::domain, "exponents are not in the positive chamber");
    const AnnulusConnection ap = principal_annulus_connection(cp, grid), am = principal_annulus_connection(cm, grid);
    GridOneForm da{grid, GridField(grid.size()), GridField(grid.size())};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        da.ax[k] = (1.0 / (2.0 * fd_step)) * (ap.ax()[k] - am.ax()[k]);
        da.ay[k] = (1.0 / (2.0 * fd_step)) * (ap.ay()[k] - am.ay()[k]);
    }
    const HolonomyHamiltonians hp = holonomy_hamiltonians(ap), hm = holonomy_hamiltonians(am);
    MomentMapCheck out{};
    out.lhs = {atiyah_bott_pair(twist_tangent(1, chi, grid), da), atiyah_bott_pair(twist_tangent(2, chi, grid), da)};
    out.rhs = {-(hp.h1 - hm.h1) / (2.0 * fd_step), -(hp.h2 - hm.h2) / (2.0 * fd_step)};
    out.expected = {-0.5 * (zeta[2] - zeta[0]), -zeta[1]};
    for (std::size_t i = 0; i < 2; ++i)
        out.max_rel_err = std::max(out.max_rel_err, std::abs(out.lhs[i] - out.rhs[i]) / (std::abs(out.rhs[i]) + 1e-12));
    return out;
}

}  // namespace operslab
