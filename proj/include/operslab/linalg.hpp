#pragma once

// Fixed-size 3x3 linear algebra for SL(3,R), sl(3,R), the sphere S^2 and
// oriented flags.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "operslab/error.hpp"

namespace operslab {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3 operator*(const Vec3& a, double s) { return s * a; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double det3(const Vec3& a, const Vec3& b, const Vec3& c) { return dot(a, cross(b, c)); }

/// Dense 3x3 real matrix, row-major.
struct Mat3 {
    std::array<double, 9> a{};

    constexpr double& operator()(int i, int j) { return a[static_cast<std::size_t>(3 * i + j)]; }
    constexpr double operator()(int i, int j) const { return a[static_cast<std::size_t>(3 * i + j)]; }

    static constexpr Mat3 zero() { return Mat3{}; }
    static constexpr Mat3 identity() {
        Mat3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
        return m;
    }
    /// Elementary matrix E_ij with zero-based indices.
    static constexpr Mat3 unit(int i, int j) {
        Mat3 m;
        m(i, j) = 1.0;
        return m;
    }
    static constexpr Mat3 diag(double d0, double d1, double d2) {
        Mat3 m;
        m(0, 0) = d0;
        m(1, 1) = d1;
        m(2, 2) = d2;
        return m;
    }
    static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
        Mat3 m;
        for (int i = 0; i < 3; ++i) {
            m(i, 0) = c0[static_cast<std::size_t>(i)];
            m(i, 1) = c1[static_cast<std::size_t>(i)];
            m(i, 2) = c2[static_cast<std::size_t>(i)];
        }
        return m;
    }

    Vec3 column(int j) const { return {(*this)(0, j), (*this)(1, j), (*this)(2, j)}; }
    Vec3 row(int i) const { return {(*this)(i, 0), (*this)(i, 1), (*this)(i, 2)}; }

    Mat3& operator+=(const Mat3& o) {
        for (std::size_t k = 0; k < 9; ++k) a[k] += o.a[k];
        return *this;
    }
    Mat3& operator-=(const Mat3& o) {
        for (std::size_t k = 0; k < 9; ++k) a[k] -= o.a[k];
        return *this;
    }
    Mat3& operator*=(double s) {
        for (auto& x : a) x *= s;
        return *this;
    }

    friend bool operator==(const Mat3&, const Mat3&) = default;
};

inline Mat3 operator+(Mat3 x, const Mat3& y) { return x += y; }
inline Mat3 operator-(Mat3 x, const Mat3& y) { return x -= y; }
inline Mat3 operator-(Mat3 x) { return x *= -1.0; }
inline Mat3 operator*(double s, Mat3 x) { return x *= s; }
inline Mat3 operator*(Mat3 x, double s) { return x *= s; }

inline Mat3 operator*(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j) + x(i, 2) * y(2, j);
    return r;
}

inline Vec3 operator*(const Mat3& m, const Vec3& v) {
    return {m(0, 0) * v[0] + m(0, 1) * v[1] + m(0, 2) * v[2], m(1, 0) * v[0] + m(1, 1) * v[1] + m(1, 2) * v[2],
            m(2, 0) * v[0] + m(2, 1) * v[1] + m(2, 2) * v[2]};
}

inline Mat3 transpose(const Mat3& m) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = m(j, i);
    return r;
}

inline double trace(const Mat3& m) { return m(0, 0) + m(1, 1) + m(2, 2); }
inline double det(const Mat3& m) { return det3(m.column(0), m.column(1), m.column(2)); }

inline Mat3 inverse(const Mat3& m) {
    const double d = det(m);
    if (d == 0.0 || !std::isfinite(d)) throw Error(ErrorKind::degenerate_frame, "singular matrix");
    Mat3 r;
    r(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    r(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    r(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    r(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    r(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    r(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    r(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    r(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    r(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return (1.0 / d) * r;
}

inline Mat3 commutator(const Mat3& x, const Mat3& y) { return x * y - y * x; }

inline double max_abs(const Mat3& m) {
    double r = 0.0;
    for (double x : m.a) r = std::max(r, std::abs(x));
    return r;
}

inline double frobenius(const Mat3& m) {
    double s = 0.0;
    for (double x : m.a) s += x * x;
    return std::sqrt(s);
}

inline bool all_finite(const Mat3& m) {
    return std::all_of(m.a.begin(), m.a.end(), [](double x) { return std::isfinite(x); });
}

inline Eigen::Matrix3d to_eigen(const Mat3& m) {
    Eigen::Matrix3d e;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e(i, j) = m(i, j);
    return e;
}

inline Mat3 from_eigen(const Eigen::Matrix3d& e) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = e(i, j);
    return m;
}

inline Mat3 expm(const Mat3& m) { return from_eigen(to_eigen(m).exp()); }

/// Principal real logarithm; the argument must have no eigenvalues on the closed negative axis.
inline Mat3 logm(const Mat3& m) {
    const Eigen::Matrix3d l = to_eigen(m).log();
    Mat3 r = from_eigen(l);
    if (!all_finite(r)) throw Error(ErrorKind::domain, "matrix logarithm undefined");
    return r;
}

/// The shift matrix sum E_{i+1,i}; the companion form of d^3.
inline Mat3 shift_matrix() { return Mat3::unit(1, 0) + Mat3::unit(2, 1); }

/// Basis of the Cartan subalgebra used by the twist Hamiltonians.
inline Mat3 cartan_xi1() { return Mat3::diag(-0.5, 0.0, 0.5); }
inline Mat3 cartan_xi2() { return Mat3::diag(-1.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0); }

// ---------------------------------------------------------------------------
// Strong types

/// Element of SL(3,R).
class GroupElem {
public:
    static constexpr double det_tolerance = 1e-9;

    GroupElem() : m_(Mat3::identity()) {}
    explicit GroupElem(const Mat3& m) : m_(m) {
        const double d = det(m);
        if (!(std::abs(d - 1.0) <= det_tolerance))
            throw Error(ErrorKind::invalid_argument, "group element has det " + std::to_string(d));
    }
    /// Rescales an invertible matrix with positive determinant onto SL(3).
    static GroupElem normalized(const Mat3& m) {
        const double d = det(m);
        if (!(d > 0.0)) throw Error(ErrorKind::invalid_argument, "cannot normalize matrix with det <= 0");
        return GroupElem(std::cbrt(1.0 / d) * m);
    }

    const Mat3& matrix() const { return m_; }
    GroupElem inverse() const { return GroupElem::normalized(operslab::inverse(m_)); }

    friend GroupElem operator*(const GroupElem& x, const GroupElem& y) {
        return GroupElem::normalized(x.m_ * y.m_);
    }

private:
    Mat3 m_;
};

/// Element of sl(3,R).
class AlgElem {
public:
    static constexpr double trace_tolerance = 1e-12;

    AlgElem() = default;
    explicit AlgElem(const Mat3& m) : m_(m) {
        const double scale = std::max(1.0, max_abs(m));
        if (!(std::abs(trace(m)) <= trace_tolerance * scale))
            throw Error(ErrorKind::invalid_argument, "Lie algebra element is not traceless");
    }
    const Mat3& matrix() const { return m_; }

private:
    Mat3 m_{};
};

/// Trace pairing tr(x y) on sl(3).
inline double trace_pairing(const Mat3& x, const Mat3& y) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) s += x(i, k) * y(k, i);
    return s;
}

/// Ray class in R^3 \ {0} modulo positive scalars, stored as the unit representative.
class SpherePoint {
public:
    explicit SpherePoint(const Vec3& v) {
        const double n = norm(v);
        if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::invalid_argument, "zero vector has no ray class");
        v_ = (1.0 / n) * v;
    }
    const Vec3& vec() const { return v_; }
    double distance(const SpherePoint& o) const { return norm(v_ - o.v_); }

private:
    Vec3 v_{};
};

/// Oriented flag, identified with the rotation whose leading columns span the flag.
class OrientedFlag {
public:
    explicit OrientedFlag(const Mat3& r) : r_(r) {
        if (max_abs(transpose(r) * r - Mat3::identity()) > 1e-9 || std::abs(det(r) - 1.0) > 1e-9)
            throw Error(ErrorKind::invalid_argument, "flag frame is not a rotation");
    }
    const Mat3& frame() const { return r_; }

private:
    Mat3 r_;
};

/// Traceless diagonal exponents (c1, c2, c3), stored through the two free parameters.
class DiagPositive {
public:
    DiagPositive(double c1, double c2) : c1_(c1), c2_(c2) {
        if (!std::isfinite(c1) || !std::isfinite(c2)) throw Error(ErrorKind::invalid_argument, "non-finite exponent");
    }
    static DiagPositive from_triple(double c1, double c2, double c3) {
        const double scale = std::max({1.0, std::abs(c1), std::abs(c2), std::abs(c3)});
        if (std::abs(c1 + c2 + c3) > 1e-12 * scale)
            throw Error(ErrorKind::invalid_argument, "exponents must sum to zero");
        return DiagPositive(c1, c2);
    }

    double c1() const { return c1_; }
    double c2() const { return c2_; }
    double c3() const { return -(c1_ + c2_); }
    std::array<double, 3> exponents() const { return {c1(), c2(), c3()}; }

    /// Membership in A_+ : strictly increasing exponents.
    bool in_positive_chamber() const { return c1() < c2() && c2() < c3(); }

    Mat3 log_matrix() const { return Mat3::diag(c1(), c2(), c3()); }
    GroupElem group_element() const {
        return GroupElem(Mat3::diag(std::exp(c1()), std::exp(c2()), std::exp(c3())));
    }

private:
    double c1_;
    double c2_;
};

// ---------------------------------------------------------------------------
// Operations

/// Gram-Schmidt of a positively oriented basis; column i spans with the previous ones span(b0..bi).
inline OrientedFlag gram_schmidt_flag(const Vec3& b0, const Vec3& b1, const Vec3& b2) {
    const double d = det3(b0, b1, b2);
    if (!(d > 1e-12)) throw Error(ErrorKind::degenerate_frame, "frame determinant " + std::to_string(d));
    auto project_out = [](Vec3 v, const Vec3& q) { return v - dot(v, q) * q; };
    const Vec3 q0 = (1.0 / norm(b0)) * b0;
    Vec3 u1 = project_out(b1, q0);
    u1 = project_out(u1, q0);
    const Vec3 q1 = (1.0 / norm(u1)) * u1;
    // The orientation is fixed by d > 0, so the last vector is the cross product.
    const Vec3 q2 = cross(q0, q1);
    return OrientedFlag(Mat3::from_columns(q0, q1, q2));
}

/// Roots of the characteristic polynomial, real roots first and ascending.
inline std::array<std::complex<double>, 3> eigenvalues(const Mat3& m) {
    using cd = std::complex<double>;
    const bool lower = m(0, 1) == 0.0 && m(0, 2) == 0.0 && m(1, 2) == 0.0;
    const bool upper = m(1, 0) == 0.0 && m(2, 0) == 0.0 && m(2, 1) == 0.0;
    if (lower || upper) {
        std::array<double, 3> d{m(0, 0), m(1, 1), m(2, 2)};
        std::sort(d.begin(), d.end());
        return {cd(d[0]), cd(d[1]), cd(d[2])};
    }
    // lambda^3 + b lambda^2 + c lambda + e
    const double b = -trace(m);
    const double c = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) + (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) +
                     (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1));
    const double e = -det(m);
    auto poly = [&](double x) { return ((x + b) * x + c) * x + e; };
    auto dpoly = [&](double x) { return (3.0 * x + 2.0 * b) * x + c; };
    auto polish = [&](double x) {
        for (int it = 0; it < 3; ++it) {
            const double dp = dpoly(x);
            if (dp == 0.0) break;
            const double step = poly(x) / dp;
            if (!std::isfinite(step)) break;
            x -= step;
        }
        return x;
    };

    const double shift = b / 3.0;
    const double p = c - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + e;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    std::array<cd, 3> roots;
    if (disc <= 0.0 && p < 0.0) {
        const double r = std::sqrt(-p / 3.0);
        const double arg = std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0);
        const double phi = std::acos(arg);
        std::array<double, 3> x;
        for (int k = 0; k < 3; ++k)
            x[static_cast<std::size_t>(k)] =
                polish(2.0 * r * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0) - shift);
        std::sort(x.begin(), x.end());
        roots = {cd(x[0]), cd(x[1]), cd(x[2])};
    } else {
        const double sq = std::sqrt(std::max(disc, 0.0));
        const double u = std::cbrt(-q / 2.0 + sq);
        const double v = std::cbrt(-q / 2.0 - sq);
        const double real = polish(u + v - shift);
        // Deflate: remaining quadratic lambda^2 + (b + real) lambda + (c + real (b + real)).
        const double bb = b + real;
        const double cc = c + real * bb;
        const double dq = bb * bb / 4.0 - cc;
        if (dq >= 0.0) {
            std::array<double, 3> x{real, polish(-bb / 2.0 - std::sqrt(dq)), polish(-bb / 2.0 + std::sqrt(dq))};
            std::sort(x.begin(), x.end());
            roots = {cd(x[0]), cd(x[1]), cd(x[2])};
        } else {
            roots = {cd(real), cd(-bb / 2.0, -std::sqrt(-dq)), cd(-bb / 2.0, std::sqrt(-dq))};
        }
    }
    return roots;
}

/// Unit null vector of m - lambda I, sign fixed so that the largest component is positive.
inline Vec3 eigenvector(const Mat3& m, double lambda) {
    Mat3 n = m - lambda * Mat3::identity();
    const Vec3 r0 = n.row(0), r1 = n.row(1), r2 = n.row(2);
    std::array<Vec3, 3> candidates{cross(r0, r1), cross(r0, r2), cross(r1, r2)};
    const Vec3* best = &candidates[0];
    for (const auto& cand : candidates)
        if (norm(cand) > norm(*best)) best = &cand;
    const double len = norm(*best);
    if (!(len > 0.0)) throw Error(ErrorKind::degeneracy, "eigenvector undefined");
    Vec3 v = (1.0 / len) * *best;
    std::size_t imax = 0;
    for (std::size_t i = 1; i < 3; ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    if (v[imax] < 0.0) v = -v;
    return v;
}

struct HyperbolicSpectrum {
    DiagPositive exponents;
    Mat3 eigenframe;  ///< columns are unit eigenvectors for e^{c1}, e^{c2}, e^{c3}
};

/// Exponents and eigenbasis of a positive hyperbolic element, or nothing.
inline std::optional<HyperbolicSpectrum> classify_positive_hyperbolic(const Mat3& g) {
    constexpr double tol = 1e-9;
    const auto ev = eigenvalues(g);
    std::array<double, 3> lam{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (std::abs(ev[i].imag()) > tol) return std::nullopt;
        lam[i] = ev[i].real();
        if (!(lam[i] > tol)) return std::nullopt;
    }
    std::sort(lam.begin(), lam.end());
    if (lam[1] - lam[0] <= tol || lam[2] - lam[1] <= tol) return std::nullopt;
    double disc = 1.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) disc *= (lam[i] - lam[j]) * (lam[i] - lam[j]);
    if (disc < 1e-18) return std::nullopt;

    const double c1 = std::log(lam[0]);
    const double c2 = std::log(lam[1]);
    const Mat3 frame = Mat3::from_columns(eigenvector(g, lam[0]), eigenvector(g, lam[1]), eigenvector(g, lam[2]));
    return HyperbolicSpectrum{DiagPositive(c1, c2), frame};
}

struct TriangleSigns {
    std::array<int, 3> signs;
    bool positive;
};

/// Open triangle of the eigen-triangulation containing v.
inline TriangleSigns triangle_of(const SpherePoint& v, const Mat3& eigenframe) {
    const Vec3 coords = inverse(eigenframe) * v.vec();
    TriangleSigns out{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (std::abs(coords[i]) <= 1e-12) throw Error(ErrorKind::boundary, "point lies on a triangulation edge");
        out.signs[i] = coords[i] > 0.0 ? 1 : -1;
    }
    out.positive = out.signs[0] * out.signs[1] * out.signs[2] * det(eigenframe) > 0.0;
    return out;
}

}  // namespace operslab
