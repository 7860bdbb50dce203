#pragma once

// Projective structures on the annulus C x [y_min, y_max]: sampled connections,
// the principal annulus, the Drinfeld-Sokolov half-annulus, structures built from
// two convex boundary curves, and the boundary restriction map.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "operslab/agd.hpp"
#include "operslab/curves.hpp"
#include "operslab/error.hpp"
#include "operslab/linalg.hpp"
#include "operslab/periodic.hpp"

namespace operslab {

/// Tensor grid: nx periodic nodes x_i = i/nx and ny equispaced nodes in [y_min, y_max].
struct AnnulusGrid {
    std::size_t nx = 256;
    std::size_t ny = 129;
    double y_min = -1.0;
    double y_max = 1.0;

    AnnulusGrid() = default;
    AnnulusGrid(std::size_t nx_, std::size_t ny_, double y_min_, double y_max_)
        : nx(nx_), ny(ny_), y_min(y_min_), y_max(y_max_) {
        if (nx < 16 || (nx & (nx - 1)) != 0) throw Error(ErrorKind::invalid_argument, "nx must be a power of two >= 16");
        if (ny < 17 || ny % 2 == 0) throw Error(ErrorKind::invalid_argument, "ny must be odd and >= 17");
        if (!(y_max > y_min)) throw Error(ErrorKind::invalid_argument, "empty y interval");
    }

    double x(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(nx); }
    double y(std::size_t j) const { return y_min + static_cast<double>(j) * dy(); }
    double dy() const { return (y_max - y_min) / static_cast<double>(ny - 1); }
    std::size_t size() const { return nx * ny; }
    std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }

    friend bool operator==(const AnnulusGrid&, const AnnulusGrid&) = default;
};

/// Matrix field on a grid, stored row by row in y.
using GridField = std::vector<Mat3>;

/// A = Ax dx + Ay dy.
class AnnulusConnection {
public:
    AnnulusConnection(AnnulusGrid grid, GridField ax, GridField ay)
        : grid_(grid), ax_(std::move(ax)), ay_(std::move(ay)) {
        if (ax_.size() != grid_.size() || ay_.size() != grid_.size())
            throw Error(ErrorKind::invalid_argument, "field size does not match grid");
        for (std::size_t k = 0; k < ax_.size(); ++k) {
            AlgElem cx(ax_[k]);
            AlgElem cy(ay_[k]);
        }
    }
    static AnnulusConnection zero(const AnnulusGrid& grid) {
        return {grid, GridField(grid.size()), GridField(grid.size())};
    }

    const AnnulusGrid& grid() const { return grid_; }
    const GridField& ax() const { return ax_; }
    const GridField& ay() const { return ay_; }
    const Mat3& ax(std::size_t i, std::size_t j) const { return ax_[grid_.index(i, j)]; }
    const Mat3& ay(std::size_t i, std::size_t j) const { return ay_[grid_.index(i, j)]; }

private:
    AnnulusGrid grid_;
    GridField ax_;
    GridField ay_;
};

namespace detail {

/// Fourth-order first derivative in y of the column values f_j, one-sided near the ends.
inline std::vector<Mat3> y_derivative(const std::vector<Mat3>& f, double h) {
    const std::size_t n = f.size();
    std::vector<Mat3> d(n);
    const double s = 1.0 / (12.0 * h);
    for (std::size_t j = 0; j < n; ++j) {
        if (j >= 2 && j + 2 < n) {
            d[j] = s * (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]);
        } else if (j < 2) {
            if (j == 0)
                d[j] = s * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
            else
                d[j] = s * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
        } else {
            const std::size_t m = n - 1;
            if (j == m)
                d[j] = s * (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]);
            else
                d[j] = s * (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]);
        }
    }
    return d;
}

inline std::vector<Mat3> grid_row(const GridField& f, const AnnulusGrid& g, std::size_t j) {
    return {f.begin() + static_cast<long>(j * g.nx), f.begin() + static_cast<long>((j + 1) * g.nx)};
}

inline std::vector<Mat3> grid_column(const GridField& f, const AnnulusGrid& g, std::size_t i) {
    std::vector<Mat3> c(g.ny);
    for (std::size_t j = 0; j < g.ny; ++j) c[j] = f[g.index(i, j)];
    return c;
}

}  // namespace detail

/// F = d_x Ay - d_y Ax + [Ax, Ay]: spectral in x, fourth order in y.
inline GridField curvature(const AnnulusConnection& a) {
    const AnnulusGrid& g = a.grid();
    GridField f(g.size());
    for (std::size_t j = 0; j < g.ny; ++j) {
        const MatSamples dx_ay = derivative(MatSamples(detail::grid_row(a.ay(), g, j)));
        for (std::size_t i = 0; i < g.nx; ++i) f[g.index(i, j)] = dx_ay[i] + commutator(a.ax(i, j), a.ay(i, j));
    }
    for (std::size_t i = 0; i < g.nx; ++i) {
        const auto dy_ax = detail::y_derivative(detail::grid_column(a.ax(), g, i), g.dy());
        for (std::size_t j = 0; j < g.ny; ++j) f[g.index(i, j)] -= dy_ax[j];
    }
    return f;
}

inline double max_abs(const GridField& f) {
    double r = 0.0;
    for (const Mat3& m : f) r = std::max(r, max_abs(m));
    return r;
}

struct SigmaPositivity {
    bool ok;
    double min_density;
};

/// Density of A21 ^ A31 against dx ^ dy.
inline std::vector<double> sigma_density(const AnnulusConnection& a) {
    std::vector<double> d(a.grid().size());
    for (std::size_t k = 0; k < d.size(); ++k) {
        const Mat3& x = a.ax()[k];
        const Mat3& y = a.ay()[k];
        d[k] = x(1, 0) * y(2, 0) - y(1, 0) * x(2, 0);
    }
    return d;
}

inline SigmaPositivity sigma_positivity(const AnnulusConnection& a) {
    const auto d = sigma_density(a);
    const double m = *std::min_element(d.begin(), d.end());
    return {m > 1e-9, m};
}

/// Ax = diag(c) - y (c2 - c1) E21 + (c3 - c1) E31, Ay = -E21.
inline AnnulusConnection principal_annulus_connection(const DiagPositive& c, const AnnulusGrid& grid) {
    if (!c.in_positive_chamber()) throw Error(ErrorKind::invalid_argument, "exponents are not in the positive chamber");
    GridField ax(grid.size()), ay(grid.size());
    for (std::size_t j = 0; j < grid.ny; ++j) {
        Mat3 x = c.log_matrix();
        x(1, 0) = -grid.y(j) * (c.c2() - c.c1());
        x(2, 0) = c.c3() - c.c1();
        for (std::size_t i = 0; i < grid.nx; ++i) {
            ax[grid.index(i, j)] = x;
            ay[grid.index(i, j)] = -Mat3::unit(1, 0);
        }
    }
    return {grid, std::move(ax), std::move(ay)};
}

/// Ray class of (e^{x c1} : -y e^{x c2} : e^{x c3}).
inline SpherePoint developing_map(const DiagPositive& c, double x, double y) {
    return SpherePoint({std::exp(x * c.c1()), -y * std::exp(x * c.c2()), std::exp(x * c.c3())});
}

/// (I - v E31) . (companion(L) du) on u in the circle, v in [y_min, y_max]:
/// Au = g xi g^{-1}, Av = E31. Its sigma-density is 1 - v a1(u).
inline AnnulusConnection ds_halfannulus_connection(const AgdOperator3& op, const AnnulusGrid& grid) {
    if (grid.nx != op.size()) throw Error(ErrorKind::invalid_argument, "grid nx must equal the operator sample count");
    if (grid.y_min < 0.0) throw Error(ErrorKind::invalid_argument, "half-annulus starts at v = 0");
    for (std::size_t i = 0; i < op.size(); ++i)
        if (!(1.0 - grid.y_max * op.a1[i] > 0.0) || !(1.0 - grid.y_min * op.a1[i] > 0.0))
            throw Error(ErrorKind::positivity_domain,
                        "density 1 - v a1 is not positive at u = " + std::to_string(grid.x(i)));
    GridField au(grid.size()), av(grid.size());
    for (std::size_t j = 0; j < grid.ny; ++j) {
        const double v = grid.y(j);
        const Mat3 g = Mat3::identity() - v * Mat3::unit(2, 0);
        const Mat3 gi = Mat3::identity() + v * Mat3::unit(2, 0);
        for (std::size_t i = 0; i < grid.nx; ++i) {
            Mat3 m = g * companion_from_coefficients(op.a0[i], op.a1[i]) * gi;
            m(2, 2) = -(m(0, 0) + m(1, 1));
            au[grid.index(i, j)] = m;
            av[grid.index(i, j)] = Mat3::unit(2, 0);
        }
    }
    return {grid, std::move(au), std::move(av)};
}

/// The x-component of a connection along the grid row j as a loop connection matrix field.
inline MatSamples row_pullback(const AnnulusConnection& a, std::size_t j) {
    return MatSamples(detail::grid_row(a.ax(), a.grid(), j));
}

// ---------------------------------------------------------------------------
// Structures from two convex boundary curves

/// Values of a periodic function on m nodes: spectral refinement or subsampling.
inline RealSamples resample(const RealSamples& f, std::size_t m) {
    if (m == f.size()) return f;
    if (m > f.size()) {
        if (m % f.size() != 0) throw Error(ErrorKind::invalid_argument, "incompatible sample counts");
        return refine(f, m / f.size());
    }
    if (f.size() % m != 0) throw Error(ErrorKind::invalid_argument, "incompatible sample counts");
    std::vector<double> v(m);
    for (std::size_t k = 0; k < m; ++k) v[k] = f[k * (f.size() / m)];
    return RealSamples(std::move(v));
}

/// Annulus between y = -delta_plus(x) and y = delta_minus(x) in principal-annulus
/// coordinates; the grid's y in [-1, 1] parametrizes each fiber affinely.
class AnnulusStructure {
public:
    AnnulusStructure(DiagPositive c, RealSamples delta_plus, RealSamples delta_minus, AnnulusGrid grid = {})
        : c_(c), plus_(std::move(delta_plus)), minus_(std::move(delta_minus)), grid_(grid) {
        if (!c_.in_positive_chamber()) throw Error(ErrorKind::domain, "exponents are not in the positive chamber");
        if (plus_.size() != minus_.size()) throw Error(ErrorKind::invalid_argument, "boundary profiles differ in size");
        if (grid_.y_min != -1.0 || grid_.y_max != 1.0)
            throw Error(ErrorKind::invalid_argument, "structure grid must span y in [-1, 1]");
        ConvexCurveDelta check_plus(c_, plus_);
        ConvexCurveDelta check_minus(c_, minus_);
    }
    AnnulusStructure(const ConvexCurveDelta& plus, const ConvexCurveDelta& minus, AnnulusGrid grid = {})
        : AnnulusStructure(plus.c(), plus.delta(), minus.delta(), grid) {
        if (std::abs(plus.c().c1() - minus.c().c1()) > 1e-12 || std::abs(plus.c().c2() - minus.c().c2()) > 1e-12)
            throw Error(ErrorKind::isomonodromy, "boundary curves have different exponents");
    }

    const DiagPositive& c() const { return c_; }
    const RealSamples& delta_plus() const { return plus_; }
    const RealSamples& delta_minus() const { return minus_; }
    const AnnulusGrid& grid() const { return grid_; }
    GroupElem monodromy() const { return c_.group_element(); }
    ConvexCurveDelta boundary(int side) const { return {c_, side > 0 ? plus_ : minus_}; }

    /// Physical y of the grid node: -delta_plus (s = -1) to delta_minus (s = 1).
    double y(std::size_t i, std::size_t j, const RealSamples& plus_nx, const RealSamples& minus_nx) const {
        const double s = grid_.y(j);
        return 0.5 * (1.0 - s) * -plus_nx[i] + 0.5 * (1.0 + s) * minus_nx[i];
    }

private:
    DiagPositive c_;
    RealSamples plus_;
    RealSamples minus_;
    AnnulusGrid grid_;
};

/// Developing map of the structure at every grid node.
inline std::vector<SpherePoint> structure_developing_map(const AnnulusStructure& s) {
    const AnnulusGrid& g = s.grid();
    const RealSamples p = resample(s.delta_plus(), g.nx), m = resample(s.delta_minus(), g.nx);
    std::vector<SpherePoint> out;
    out.reserve(g.size());
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) out.push_back(developing_map(s.c(), g.x(i), s.y(i, j, p, m)));
    return out;
}

/// Principal annulus connection pulled back along (x, s) -> (x, y(x, s)).
inline AnnulusConnection structure_connection(const AnnulusStructure& s) {
    const AnnulusGrid& g = s.grid();
    const RealSamples p = resample(s.delta_plus(), g.nx), m = resample(s.delta_minus(), g.nx);
    const RealSamples dp = derivative(p), dm = derivative(m);
    const DiagPositive& c = s.c();
    GridField ax(g.size()), ay(g.size());
    for (std::size_t j = 0; j < g.ny; ++j) {
        const double sv = g.y(j);
        for (std::size_t i = 0; i < g.nx; ++i) {
            const double y = s.y(i, j, p, m);
            const double y_x = 0.5 * (1.0 - sv) * -dp[i] + 0.5 * (1.0 + sv) * dm[i];
            const double y_s = 0.5 * (p[i] + m[i]);
            Mat3 x = c.log_matrix();
            x(1, 0) = -y * (c.c2() - c.c1()) - y_x;
            x(2, 0) = c.c3() - c.c1();
            ax[g.index(i, j)] = x;
            ay[g.index(i, j)] = -y_s * Mat3::unit(1, 0);
        }
    }
    return {g, std::move(ax), std::move(ay)};
}

struct BoundaryOperators {
    AgdOperator3 plus;
    AgdOperator3 minus;
};

inline BoundaryOperators boundary_psi(const AnnulusStructure& s) {
    return {operator_of_curve(delta_to_curve(s.boundary(+1))), operator_of_curve(delta_to_curve(s.boundary(-1)))};
}

/// Arrow of the boundary groupoid: an isomonodromic replacement source -> target.
struct BoundaryArrow {
    ConvexCurveDelta target;
    ConvexCurveDelta source;
};

/// Replaces the boundary profile on `side` (+1 for delta_plus, -1 for delta_minus).
inline AnnulusStructure groupoid_act(const BoundaryArrow& arrow, const AnnulusStructure& s, int side) {
    static constexpr double tolerance = 1e-9;
    if (side != 1 && side != -1) throw Error(ErrorKind::invalid_argument, "side must be +1 or -1");
    const RealSamples& current = side > 0 ? s.delta_plus() : s.delta_minus();
    auto same_c = [](const DiagPositive& a, const DiagPositive& b) {
        return std::abs(a.c1() - b.c1()) <= tolerance && std::abs(a.c2() - b.c2()) <= tolerance;
    };
    if (!same_c(arrow.source.c(), s.c()) || arrow.source.delta().size() != current.size() ||
        max_abs_diff(arrow.source.delta(), current) > tolerance)
        throw Error(ErrorKind::arrow_source, "arrow source is not the current boundary profile");
    if (!same_c(arrow.target.c(), s.c()))
        throw Error(ErrorKind::isomonodromy, "arrow target has different exponents");
    if (arrow.target.delta().size() != current.size())
        throw Error(ErrorKind::invalid_argument, "arrow target sample count differs from the structure");
    if (side > 0) return {s.c(), arrow.target.delta(), s.delta_minus(), s.grid()};
    return {s.c(), s.delta_plus(), arrow.target.delta(), s.grid()};
}

/// (a, b) o (b, c) = (a, c).
inline BoundaryArrow compose(const BoundaryArrow& later, const BoundaryArrow& earlier) {
    if (max_abs_diff(later.source.delta(), earlier.target.delta()) > 1e-9)
        throw Error(ErrorKind::arrow_source, "arrows are not composable");
    return {later.target, earlier.source};
}

}  // namespace operslab
