#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "operslab/dsokolov.hpp"
#include "support.hpp"

using namespace operslab;
using namespace testsupport;

namespace {

LoopConnection constant_connection(const Mat3& x, std::size_t n = 256) {
    return LoopConnection(MatSamples(std::vector<Mat3>(n, x)));
}

std::vector<double> sorted_abs_eigenvalues(const Mat3& m) {
    std::vector<double> out;
    for (auto z : eigenvalues(m)) out.push_back(std::abs(z));
    std::sort(out.begin(), out.end());
    return out;
}

GaugeLoop rotation_loop(std::size_t n, int turns) {
    return GaugeLoop(MatSamples::from_function(n, [turns](double t) {
        const double a = two_pi * turns * t;
        Mat3 m = Mat3::identity();
        m(1, 1) = std::cos(a), m(1, 2) = -std::sin(a);
        m(2, 1) = std::sin(a), m(2, 2) = std::cos(a);
        return m;
    }));
}

double max_coefficient_error(const AgdOperator3& a, const AgdOperator3& b) {
    return std::max(max_abs_diff(a.a0, b.a0), max_abs_diff(a.a1, b.a1));
}

}  // namespace

TEST(Gauge, IdentityAndConstant) {
    const auto a = companion_connection(smooth_operator());
    EXPECT_LT(max_abs_diff(gauge_act(GaugeLoop::identity(a.size()), a).xi(), a.xi()), 1e-15);
    std::mt19937_64 rng(1);
    const Mat3 g0 = random_group(rng);
    const auto b = gauge_act(GaugeLoop(MatSamples(std::vector<Mat3>(a.size(), g0))), a);
    for (std::size_t k = 0; k < a.size(); k += 97) EXPECT_LT(max_abs(b[k] - g0 * a[k] * inverse(g0)), 1e-11);
}

TEST(Gauge, ActionAxiom) {
    std::mt19937_64 rng(2);
    const auto a = companion_connection(smooth_operator());
    for (int trial = 0; trial < 3; ++trial) {
        const GaugeLoop g(random_loop(rng, 0.3, false, false));
        const GaugeLoop h(random_loop(rng, 0.3, false, false));
        EXPECT_LT(max_abs_diff(gauge_act(g * h, a).xi(), gauge_act(g, gauge_act(h, a)).xi()), 1e-8);
    }
}

TEST(Gauge, StabilizerWinding) {
    EXPECT_EQ(rotation_loop(64, 1).winding(), 1);
    EXPECT_EQ(rotation_loop(64, -2).winding(), -2);
    std::mt19937_64 rng(3);
    EXPECT_EQ(GaugeLoop(random_loop(rng, 0.3, true, false)).winding(), 0);
    EXPECT_FALSE(GaugeLoop(random_loop(rng, 0.3, false, false)).winding().has_value());
}

TEST(Holonomy, ZeroAndConstant) {
    EXPECT_LT(max_abs(holonomy(constant_connection(Mat3::zero())).matrix() - Mat3::identity()), 1e-15);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> d(0.0, 0.7);
    for (int trial = 0; trial < 5; ++trial) {
        Mat3 x;
        for (auto& v : x.a) v = d(rng);
        x(2, 2) = -(x(0, 0) + x(1, 1));
        const Mat3 h = holonomy(constant_connection(x)).matrix();
        EXPECT_LT(max_abs(h - expm(-x)), 1e-9);
        const auto got = sorted_abs_eigenvalues(h), want = sorted_abs_eigenvalues(expm(-x));
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], want[i], 1e-9);
        EXPECT_LT(max_abs(curve_monodromy(constant_connection(x)).matrix() - expm(x)), 1e-9);
    }
}

TEST(Holonomy, MatchesFundamentalFrame) {
    const auto op = smooth_operator();
    const auto f = fundamental_frame(op);
    EXPECT_LT(max_abs(holonomy(companion_connection(op)).matrix() - f.mono.inverse().matrix()), 1e-10);
    EXPECT_LT(max_abs(curve_monodromy(companion_connection(op)).matrix() - f.mono.matrix()), 1e-10);
}

TEST(Holonomy, SpectrumIsGaugeInvariant) {
    std::mt19937_64 rng(5);
    const auto a = companion_connection(smooth_operator());
    const auto want = sorted_abs_eigenvalues(holonomy(a).matrix());
    for (int trial = 0; trial < 3; ++trial) {
        const GaugeLoop g(random_loop(rng, 0.4, true, false));
        ASSERT_EQ(g.winding(), 0);
        const auto got = sorted_abs_eigenvalues(holonomy(gauge_act(g, a)).matrix());
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], want[i], 1e-7);
    }
}

TEST(CurveOfConnection, TwoPathsAgree) {
    const auto op = AgdOperator3::constant(0.0, -1.0);
    const auto via_connection = operator_of_curve(curve_of_connection(companion_connection(op)));
    const auto via_operator = operator_of_curve(curve_of_operator(op));
    EXPECT_LT(max_coefficient_error(via_connection, via_operator), 1e-6);
    EXPECT_LT(max_coefficient_error(via_connection, op), 1e-6);
    const auto smooth = smooth_operator();
    EXPECT_LT(max_coefficient_error(operator_of_curve(curve_of_connection(companion_connection(smooth))), smooth), 1e-6);
}

TEST(CurveOfConnection, DegenerateIsRejected) {
    try {
        curve_of_connection(constant_connection(Mat3::zero()));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::not_positive);
    }
}

TEST(CurveOfConnection, StabilizerGaugeKeepsRays) {
    std::mt19937_64 rng(6);
    const auto a = companion_connection(smooth_operator());
    const GaugeLoop g(random_loop(rng, 0.3, true, true));
    const auto c0 = curve_of_connection(a);
    const auto c1 = curve_of_connection(gauge_act(g, a));
    for (std::size_t k = 0; k < c0.size(); ++k)
        ASSERT_LT(SpherePoint(c0[k].p).distance(SpherePoint(c1[k].p)), 1e-8) << k;
}

TEST(TauPositivity, Examples) {
    const auto a = companion_connection(smooth_operator());
    const auto pos = tau_positivity(a);
    EXPECT_TRUE(pos.ok);
    EXPECT_EQ(pos.winding, 0);
    EXPECT_FALSE(tau_positivity(constant_connection(Mat3::zero())).ok);
    const auto twisted = tau_positivity(gauge_act(rotation_loop(a.size(), 1), a));
    EXPECT_EQ(twisted.winding, 1);
    EXPECT_FALSE(twisted.ok);
}

TEST(DsNormalize, CompanionIsFixed) {
    const auto op = smooth_operator();
    const auto r = ds_normalize(companion_connection(op));
    EXPECT_LT(max_coefficient_error(r.op, op), 1e-6);
    EXPECT_LT(max_abs_diff(r.gauge.g(), MatSamples(std::vector<Mat3>(op.size(), Mat3::identity()))), 1e-8);
}

TEST(DsNormalize, RecoversGaugedOperator) {
    std::mt19937_64 rng(7);
    const auto op = smooth_operator();
    for (int trial = 0; trial < 3; ++trial) {
        const GaugeLoop g0(random_loop(rng, 0.3, true, false));
        ASSERT_EQ(g0.winding(), 0);
        const auto a = gauge_act(g0, companion_connection(op));
        const auto r = ds_normalize(a);
        EXPECT_LT(max_coefficient_error(r.op, op), 1e-5);
        EXPECT_LT(r.periodicity_defect, 1e-6);
        EXPECT_LT(max_abs_diff(gauge_act(r.gauge, a).xi(), companion_connection(r.op).xi()), 1e-5);
        const auto want = sorted_abs_eigenvalues(holonomy(companion_connection(r.op)).matrix());
        const auto got = sorted_abs_eigenvalues(holonomy(a).matrix());
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], want[i], 1e-7);
    }
}

TEST(DsNormalize, RejectsNonPositive) {
    const auto a = gauge_act(rotation_loop(default_samples, 1), companion_connection(smooth_operator()));
    try {
        ds_normalize(a);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::domain);
    }
}

TEST(FirstRow, ShapeAndSinglePoint) {
    std::mt19937_64 rng(8);
    const auto op = smooth_operator();
    const auto reduced = first_row_reduce(companion_connection(op));
    const auto other = first_row_reduce(gauge_act(GaugeLoop(random_loop(rng, 0.3, true, false)),
                                                  companion_connection(AgdOperator3::constant(0.0, -1.0))));
    const auto again = first_row_reduce(reduced);
    for (std::size_t k = 0; k < reduced.size(); ++k) {
        for (int i = 1; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                ASSERT_EQ(reduced[k](i, j), shift_matrix()(i, j));
                ASSERT_EQ(other[k](i, j), reduced[k](i, j));
                ASSERT_EQ(again[k](i, j), reduced[k](i, j));
            }
        ASSERT_EQ(reduced[k](0, 0), 0.0);
    }
}

TEST(FirstRow, GaugeEquivalentToCompanion) {
    const auto op = smooth_operator();
    const GaugeLoop b(MatSamples::from_function(op.size(), [&](double t) {
        return Mat3::identity() - eval(op.a1, t) * Mat3::unit(0, 2);
    }));
    const auto direct = gauge_act(b, companion_connection(op));
    EXPECT_LT(max_abs_diff(direct.xi(), first_row_reduce(companion_connection(op)).xi()), 1e-8);
}

TEST(IntermediateForm, SubdiagonalPositive) {
    std::mt19937_64 rng(9);
    const auto a = gauge_act(GaugeLoop(random_loop(rng, 0.3, true, false)), companion_connection(smooth_operator()));
    const auto form = intermediate_form(a);
    EXPECT_TRUE(form.ok);
    EXPECT_LT(form.max_abs_corner, 1e-8);
    EXPECT_GT(form.min_subdiagonal, 1e-9);
}

TEST(Lift, DeltaCurveCompanionHasWindingZero) {
    std::mt19937_64 rng(10);
    const DiagPositive c = random_chamber(rng);
    const auto curve = delta_to_curve(random_convex_delta(rng, c, 512));
    const auto op = operator_of_curve(curve);
    const auto pos = tau_positivity(companion_connection(op));
    EXPECT_TRUE(pos.ok);
    EXPECT_EQ(pos.winding, 0);
}
