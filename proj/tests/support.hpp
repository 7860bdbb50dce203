#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "operslab/curves.hpp"

namespace testsupport {

using namespace operslab;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline DiagPositive random_chamber(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> gap(0.3, 1.5);
    const double g1 = gap(rng), g2 = gap(rng);
    return DiagPositive(-(2.0 * g1 + g2) / 3.0, (g1 - g2) / 3.0);
}

inline RealSamples trig_profile(std::mt19937_64& rng, double amplitude, std::size_t n = default_samples) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::array<double, 6> coef{};
    for (auto& x : coef) x = u(rng);
    return RealSamples::from_function(n, [&](double t) {
        double s = 1.0;
        for (int k = 1; k <= 3; ++k)
            s += amplitude / (k * k) * (coef[2 * k - 2] * std::cos(two_pi * k * t) + coef[2 * k - 1] * std::sin(two_pi * k * t));
        return s;
    });
}

/// Random delta satisfying the convexity inequality for c with margin a quarter of the gap term.
inline ConvexCurveDelta random_convex_delta(std::mt19937_64& rng, const DiagPositive& c,
                                            std::size_t n = default_samples) {
    std::uniform_real_distribution<double> amp(0.0, 0.3);
    double a = amp(rng);
    for (;;) {
        std::mt19937_64 trial(rng());
        RealSamples d = trig_profile(trial, a, n);
        const RealSamples defect = delta_convexity_defect(c, d);
        const double margin = 0.25 * (c.c2() - c.c1()) * (c.c3() - c.c2());
        const bool robust = std::all_of(defect.values().begin(), defect.values().end(),
                                        [&](double x) { return x < -margin; });
        if (robust && delta_convexity(c, d)) return ConvexCurveDelta(c, std::move(d));
        a *= 0.5;
    }
}

/// Positive delta with a large-curvature wiggle violating the inequality.
inline RealSamples random_violator(std::mt19937_64& rng, std::size_t n = default_samples) {
    std::uniform_real_distribution<double> amp(0.3, 0.6), phase(0.0, two_pi);
    std::uniform_int_distribution<int> mode(2, 3);
    const double a = amp(rng), ph = phase(rng);
    const int k = mode(rng);
    return RealSamples::from_function(n, [&](double t) { return 1.0 + a * std::cos(two_pi * k * t + ph); });
}

inline Mat3 random_group(std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    Mat3 m;
    do {
        for (auto& x : m.a) x = d(rng);
    } while (det(m) < 0.3);
    return GroupElem::normalized(m).matrix();
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    Mat3 m;
    do {
        for (auto& x : m.a) x = d(rng);
    } while (det(m) < 0.3);
    return gram_schmidt_flag(m.column(0), m.column(1), m.column(2)).frame();
}

/// exp of a random trigonometric loop in sl(3); when `stabilizer` is set the loop fixes
/// the ray of e1, and `pinned` makes it the identity at t = 0.
inline MatSamples random_loop(std::mt19937_64& rng, double amplitude, bool stabilizer, bool pinned,
                              std::size_t n = default_samples) {
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    std::array<Mat3, 6> coef;
    for (auto& m : coef) {
        for (auto& x : m.a) x = u(rng);
        if (stabilizer) m(1, 0) = m(2, 0) = 0.0;
        m(2, 2) = -(m(0, 0) + m(1, 1));
    }
    std::vector<Mat3> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n);
        Mat3 x;
        for (int k = 1; k <= 3; ++k) {
            const std::size_t j = static_cast<std::size_t>(2 * k - 2);
            x += std::sin(two_pi * k * t) * coef[j];
            if (!pinned) x += std::cos(two_pi * k * t) * coef[j + 1];
        }
        out[i] = GroupElem::normalized(expm(x)).matrix();
    }
    return MatSamples(std::move(out));
}

inline AgdOperator3 smooth_operator(std::size_t n = default_samples) {
    return {RealSamples::from_function(n, [](double t) { return 0.3 * std::sin(two_pi * t) + 0.1 * std::cos(2 * two_pi * t); }),
            RealSamples::from_function(n, [](double t) { return -1.0 + 0.2 * std::cos(two_pi * t); })};
}

}  // namespace testsupport
