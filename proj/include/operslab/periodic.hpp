#pragma once

// Sampled 1-periodic functions on R/Z: spectral differentiation, periodic cubic
// splines, trapezoidal quadrature, and fixed-step transport ODEs.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "operslab/error.hpp"
#include "operslab/linalg.hpp"

namespace operslab {

inline constexpr std::size_t default_samples = 1024;

namespace detail {

/// Real-to-complex / complex-to-real FFTW plans, one pair per size. Planning is
/// serialized; execution on caller-owned buffers is reentrant.
class FftPlans {
public:
    struct Pair {
        fftw_plan forward = nullptr;
        fftw_plan backward = nullptr;
    };

    static const Pair& get(std::size_t n) {
        static FftPlans instance;
        std::lock_guard lock(instance.mutex_);
        auto it = instance.plans_.find(n);
        if (it != instance.plans_.end()) return it->second;
        double* in = fftw_alloc_real(n);
        fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
        Pair p;
        const int ni = static_cast<int>(n);
        p.forward = fftw_plan_dft_r2c_1d(ni, in, out, FFTW_ESTIMATE);
        p.backward = fftw_plan_dft_c2r_1d(ni, out, in, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        return instance.plans_.emplace(n, p).first->second;
    }

    FftPlans() = default;
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
    ~FftPlans() {
        for (auto& [n, p] : plans_) {
            fftw_destroy_plan(p.forward);
            fftw_destroy_plan(p.backward);
        }
    }

private:
    std::mutex mutex_;
    std::map<std::size_t, Pair> plans_;
};

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

/// Index past which the spectrum is a noise plateau: when the upper half of the
/// spectrum (k >= n/4) lies below 1e-8 of the peak, its maximum estimates the noise
/// level and every coefficient after the last one exceeding 8 times that level is noise.
inline std::size_t resolved_modes(const fftw_complex* spec, std::size_t n) {
    double peak = 0.0, tail = 0.0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double a = std::hypot(spec[k][0], spec[k][1]);
        peak = std::max(peak, a);
        if (k >= n / 4) tail = std::max(tail, a);
    }
    if (!(tail <= 1e-8 * peak)) return n / 2 + 1;
    const double cutoff = 8.0 * tail;
    std::size_t last = 0;
    for (std::size_t k = 0; k <= n / 2; ++k)
        if (std::hypot(spec[k][0], spec[k][1]) > cutoff) last = k;
    return last + 1;
}

/// Applies a Fourier multiplier m(k) (k the signed frequency) to real periodic data,
/// optionally dropping the noise plateau first.
inline std::vector<double> apply_multiplier(std::span<const double> f,
                                            const std::function<std::complex<double>(long)>& multiplier,
                                            bool chop_noise = false) {
    const std::size_t n = f.size();
    const auto& plans = FftPlans::get(n);
    std::unique_ptr<double, FftwDeleter> buf(fftw_alloc_real(n));
    std::unique_ptr<fftw_complex, FftwDeleter> spec(fftw_alloc_complex(n / 2 + 1));
    std::copy(f.begin(), f.end(), buf.get());
    fftw_execute_dft_r2c(plans.forward, buf.get(), spec.get());
    const std::size_t keep = chop_noise ? resolved_modes(spec.get(), n) : n / 2 + 1;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        std::complex<double> c(spec.get()[k][0], spec.get()[k][1]);
        if (k >= keep) c = 0.0;
        c *= multiplier(static_cast<long>(k)) / static_cast<double>(n);
        spec.get()[k][0] = c.real();
        spec.get()[k][1] = c.imag();
    }
    fftw_execute_dft_c2r(plans.backward, spec.get(), buf.get());
    return std::vector<double>(buf.get(), buf.get() + n);
}

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const Mat3& m) { return all_finite(m); }

}  // namespace detail

/// Values of a 1-periodic function at the nodes t_k = k/n.
template <class T>
class PeriodicSamples {
public:
    static constexpr std::size_t min_size = 16;

    PeriodicSamples() = default;
    explicit PeriodicSamples(std::vector<T> values) : values_(std::move(values)) {
        const std::size_t n = values_.size();
        if (n < min_size || (n & (n - 1)) != 0)
            throw Error(ErrorKind::invalid_argument, "sample count must be a power of two >= 16");
        for (const auto& v : values_)
            if (!detail::is_finite(v)) throw Error(ErrorKind::invalid_argument, "non-finite sample");
    }

    template <class F>
    static PeriodicSamples from_function(std::size_t n, F&& f) {
        std::vector<T> v;
        v.reserve(n);
        for (std::size_t k = 0; k < n; ++k) v.push_back(f(static_cast<double>(k) / static_cast<double>(n)));
        return PeriodicSamples(std::move(v));
    }

    std::size_t size() const { return values_.size(); }
    double node(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(values_.size()); }
    const T& operator[](std::size_t k) const { return values_[k]; }
    const std::vector<T>& values() const { return values_; }

    /// Sample at an integer index, reduced modulo n.
    const T& wrapped(long k) const {
        const long n = static_cast<long>(values_.size());
        return values_[static_cast<std::size_t>(((k % n) + n) % n)];
    }

private:
    std::vector<T> values_;
};

using RealSamples = PeriodicSamples<double>;
using MatSamples = PeriodicSamples<Mat3>;

inline RealSamples component(const MatSamples& m, int i, int j) {
    std::vector<double> v(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) v[k] = m[k](i, j);
    return RealSamples(std::move(v));
}

inline RealSamples operator+(const RealSamples& a, const RealSamples& b) {
    std::vector<double> v(a.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = a[k] + b[k];
    return RealSamples(std::move(v));
}

inline RealSamples operator*(double s, const RealSamples& a) {
    std::vector<double> v(a.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = s * a[k];
    return RealSamples(std::move(v));
}

inline double max_abs(const RealSamples& f) {
    double r = 0.0;
    for (double x : f.values()) r = std::max(r, std::abs(x));
    return r;
}

inline double max_abs_diff(const RealSamples& a, const RealSamples& b) {
    double r = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) r = std::max(r, std::abs(a[k] - b[k]));
    return r;
}

inline double max_abs_diff(const MatSamples& a, const MatSamples& b) {
    double r = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) r = std::max(r, max_abs(a[k] - b[k]));
    return r;
}

/// Trigonometric interpolation onto a grid `factor` times finer (zero padding).
inline RealSamples refine(const RealSamples& f, std::size_t factor) {
    const std::size_t n = f.size(), m = n * factor;
    if (factor == 1) return f;
    std::unique_ptr<double, detail::FftwDeleter> buf(fftw_alloc_real(std::max(n, m)));
    std::unique_ptr<fftw_complex, detail::FftwDeleter> spec(fftw_alloc_complex(m / 2 + 1));
    std::copy(f.values().begin(), f.values().end(), buf.get());
    fftw_execute_dft_r2c(detail::FftPlans::get(n).forward, buf.get(), spec.get());
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        spec.get()[k][0] *= scale;
        spec.get()[k][1] *= scale;
    }
    spec.get()[n / 2][0] *= 0.5;
    spec.get()[n / 2][1] = 0.0;
    for (std::size_t k = n / 2 + 1; k <= m / 2; ++k) spec.get()[k][0] = spec.get()[k][1] = 0.0;
    fftw_execute_dft_c2r(detail::FftPlans::get(m).backward, spec.get(), buf.get());
    return RealSamples(std::vector<double>(buf.get(), buf.get() + m));
}

/// Spectral derivative; the Nyquist mode and any noise plateau are dropped.
inline RealSamples derivative(const RealSamples& f) {
    const long n = static_cast<long>(f.size());
    auto v = detail::apply_multiplier(f.values(), [n](long k) {
        if (2 * k == n) return std::complex<double>(0.0);
        return std::complex<double>(0.0, 2.0 * std::numbers::pi * static_cast<double>(k));
    }, /*chop_noise=*/true);
    return RealSamples(std::move(v));
}

inline MatSamples derivative(const MatSamples& f) {
    std::vector<Mat3> out(f.size());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const RealSamples d = derivative(component(f, i, j));
            for (std::size_t k = 0; k < f.size(); ++k) out[k](i, j) = d[k];
        }
    return MatSamples(std::move(out));
}

/// Trapezoidal rule over one period (the sample mean).
inline double integrate_period(const RealSamples& f) {
    double s = 0.0;
    for (double x : f.values()) s += x;
    return s / static_cast<double>(f.size());
}

/// Periodic cubic spline through the samples of a real periodic function.
class PeriodicSpline {
public:
    PeriodicSpline() = default;
    explicit PeriodicSpline(const RealSamples& f) : f_(f.values()) {
        // Second derivatives solve the circulant system (M_{i-1} + 4 M_i + M_{i+1}) = 6 n^2 (second difference).
        const double n = static_cast<double>(f_.size());
        m_ = detail::apply_multiplier(f_, [n](long k) {
            const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / n);
            return std::complex<double>(6.0 * n * n * (2.0 * c - 2.0) / (4.0 + 2.0 * c));
        });
    }

    double operator()(double t) const {
        const std::size_t n = f_.size();
        const double x = (t - std::floor(t)) * static_cast<double>(n);
        auto i = static_cast<std::size_t>(x);
        double tau = x - static_cast<double>(i);
        if (i >= n) {
            i = n - 1;
            tau = 1.0;
        }
        const std::size_t j = (i + 1 == n) ? 0 : i + 1;
        const double h2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
        const double s = 1.0 - tau;
        return s * f_[i] + tau * f_[j] + h2 / 6.0 * ((s * s * s - s) * m_[i] + (tau * tau * tau - tau) * m_[j]);
    }

private:
    std::vector<double> f_;
    std::vector<double> m_;
};

/// Entrywise periodic spline of a matrix-valued function.
class MatSpline {
public:
    explicit MatSpline(const MatSamples& f) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) entries_[static_cast<std::size_t>(3 * i + j)] = PeriodicSpline(component(f, i, j));
    }
    Mat3 operator()(double t) const {
        Mat3 m;
        for (std::size_t k = 0; k < 9; ++k) m.a[k] = entries_[k](t);
        return m;
    }

private:
    std::array<PeriodicSpline, 9> entries_;
};

/// Interpolated value of a sampled periodic function at arbitrary t.
inline double eval(const RealSamples& f, double t) { return PeriodicSpline(f)(t); }
inline Mat3 eval(const MatSamples& f, double t) { return MatSpline(f)(t); }

// ---------------------------------------------------------------------------
// Transport

/// Fundamental solution sampled at the coefficient nodes.
struct Transport {
    std::vector<Mat3> nodes;  ///< value at t_k = k/n, k = 0..n-1
    Mat3 end;                 ///< value at t = 1
};

/// Classical RK4 for X' = X xi(t) (right = true) or X' = -xi(t) X (right = false),
/// X(0) = I, with `oversample` steps per node interval.
template <class Generator>
Transport integrate_transport(Generator&& xi, std::size_t nodes, bool right, std::size_t oversample = 4) {
    const std::size_t steps = nodes * oversample;
    const double h = 1.0 / static_cast<double>(steps);
    auto rhs = [&](const Mat3& x, double t) { return right ? x * xi(t) : -(xi(t) * x); };
    Transport out;
    out.nodes.reserve(nodes);
    Mat3 x = Mat3::identity();
    for (std::size_t s = 0; s < steps; ++s) {
        if (s % oversample == 0) out.nodes.push_back(x);
        const double t = static_cast<double>(s) * h;
        const Mat3 k1 = rhs(x, t);
        const Mat3 k2 = rhs(x + (0.5 * h) * k1, t + 0.5 * h);
        const Mat3 k3 = rhs(x + (0.5 * h) * k2, t + 0.5 * h);
        const Mat3 k4 = rhs(x + h * k3, t + h);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!all_finite(x)) throw Error(ErrorKind::integration, "transport diverged at step " + std::to_string(s));
    }
    out.end = x;
    return out;
}

}  // namespace operslab
