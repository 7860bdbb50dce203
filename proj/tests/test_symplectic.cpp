#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "operslab/symplectic.hpp"
#include "support.hpp"

using namespace operslab;
using namespace testsupport;

namespace {

const DiagPositive c_std = DiagPositive::from_triple(-1.0, 0.0, 1.0);

GridOneForm constant_form(const AnnulusGrid& g, const Mat3& x, const Mat3& y) {
    return {g, GridField(g.size(), x), GridField(g.size(), y)};
}

/// Trapezoid sum of chi' on the grid: 1 - (h / 2 eps)^4 by Euler-Maclaurin, since chi'
/// is a quartic on [-eps, eps] whose third derivative jumps by 720 / (2 eps)^4 at each end.
double trapezoid_chi_integral(const AnnulusGrid& g, double eps) {
    const double r = g.dy() / (2.0 * eps);
    return 1.0 - r * r * r * r;
}

std::array<double, 3> random_zeta(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double z1 = u(rng), z2 = u(rng);
    return {z1, z2, -(z1 + z2)};
}

}  // namespace

TEST(Bump, Profile) {
    const BumpFunction chi(0.5);
    EXPECT_EQ(chi(-0.5), 0.0);
    EXPECT_EQ(chi(0.5), 1.0);
    EXPECT_EQ(chi(-0.7), 0.0);
    EXPECT_DOUBLE_EQ(chi(0.0), 0.5);
    double prev = 0.0;
    for (double y = -0.6; y <= 0.6; y += 0.01) {
        EXPECT_GE(chi(y), prev);
        prev = chi(y);
    }
    EXPECT_THROW(BumpFunction(0.95), Error);
    EXPECT_THROW(BumpFunction(0.0), Error);
}

TEST(Pairing, Examples) {
    const AnnulusGrid g(64, 33, -1, 1);
    const auto alpha = constant_form(g, Mat3::unit(1, 0), Mat3::zero());
    const auto beta = constant_form(g, Mat3::zero(), Mat3::unit(0, 1));
    EXPECT_NEAR(atiyah_bott_pair(alpha, beta), 2.0, 1e-14);
    EXPECT_EQ(atiyah_bott_pair(alpha, alpha), 0.0);
    const auto a = tangent_of(principal_annulus_connection(c_std, g));
    EXPECT_EQ(atiyah_bott_pair(a, a), 0.0);
    const auto t = twist_tangent(1, BumpFunction(0.5), g);
    EXPECT_NEAR(atiyah_bott_pair(a, t), -atiyah_bott_pair(t, a), 1e-15);
    GridOneForm scaled = a;
    for (auto& m : scaled.ax) m *= 3.5;
    for (auto& m : scaled.ay) m *= 3.5;
    EXPECT_NEAR(atiyah_bott_pair(scaled, t), 3.5 * atiyah_bott_pair(a, t), 1e-12);
    try {
        atiyah_bott_pair(a, twist_tangent(1, BumpFunction(0.5), AnnulusGrid(64, 17, -1, 1)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::grid_mismatch);
    }
}

TEST(Twist, TangentFormula) {
    const AnnulusGrid g(16, 33, -1, 1);
    const BumpFunction chi(0.5);
    const auto a1 = twist_tangent(1, chi, g);
    const std::size_t mid = midline_row(g);
    EXPECT_LT(max_abs(a1.ay[g.index(3, mid)] - chi.derivative(0.0) * (cartan_xi1() + Mat3::unit(2, 0))), 1e-15);
    EXPECT_EQ(max_abs(a1.ax), 0.0);
    const auto a2 = twist_tangent(2, chi, g);
    for (std::size_t j = 0; j < g.ny; ++j)
        if (std::abs(g.y(j)) >= 0.5) EXPECT_EQ(max_abs(a2.ay[g.index(0, j)]), 0.0);
}

TEST(Twist, DiagonalPartIntegratesToCartan) {
    for (double eps : {0.25, 0.5, 0.75}) {
        const AnnulusGrid g(16, 129, -1, 1);
        const BumpFunction chi(eps);
        for (int i : {1, 2}) {
            const auto alpha = twist_tangent(i, chi, g);
            Mat3 sum;
            for (std::size_t j = 0; j < g.ny; ++j) {
                const Mat3& m = alpha.ay[g.index(0, j)];
                const double w = (j == 0 || j + 1 == g.ny) ? 0.5 : 1.0;
                sum += (w * g.dy()) * Mat3::diag(m(0, 0), m(1, 1), m(2, 2));
            }
            const Mat3 xi = i == 1 ? cartan_xi1() : cartan_xi2();
            EXPECT_LT(max_abs(sum - trapezoid_chi_integral(g, eps) * xi), 1e-14);
            EXPECT_LT(max_abs(sum - xi), 2e-5);
        }
    }
}

TEST(Twist, FlowStaysFlatAndKeepsHolonomy) {
    std::mt19937_64 rng(51);
    const DiagPositive c = random_chamber(rng);
    const AnnulusGrid g(64, 65, -1, 1);
    const auto a = principal_annulus_connection(c, g);
    const BumpFunction chi(0.5);
    EXPECT_EQ(twist_flow(a, 1, 0.0, chi).ay(), a.ay());
    const auto h0 = holonomy_hamiltonians(a);
    for (int i : {1, 2})
        for (double t : {-1.0, 0.4, 1.0}) {
            const auto b = twist_flow(a, i, t, chi);
            EXPECT_LT(max_abs(curvature(b)), 1e-8);
            const auto h = holonomy_hamiltonians(b);
            EXPECT_NEAR(h.h1, h0.h1, 1e-12);
            EXPECT_NEAR(h.h2, h0.h2, 1e-12);
            for (std::size_t j : {std::size_t{0}, g.ny - 1})
                EXPECT_LT(max_abs(row_transport(b, j) - row_transport(a, j)), 1e-15);
        }
}

TEST(Twist, NonModelConnectionIsRejected) {
    const AnnulusGrid g(64, 33, -1, 1);
    GridField ax(g.size(), Mat3::diag(-1, 0, 1));
    const AnnulusConnection a(g, ax, GridField(g.size()));
    try {
        twist_flow(a, 1, 1.0, BumpFunction(0.5));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::model_mismatch);
    }
}

TEST(Hamiltonians, ReferenceValues) {
    const AnnulusGrid g(256, 17, -1, 1);
    const auto h = holonomy_hamiltonians(principal_annulus_connection(c_std, g));
    EXPECT_NEAR(h.h1, 1.0, 1e-10);
    EXPECT_NEAR(h.h2, 0.0, 1e-10);
    const auto k = holonomy_hamiltonians(principal_annulus_connection(DiagPositive::from_triple(-2.0, 0.5, 1.5), g));
    EXPECT_NEAR(k.h1, 1.75, 1e-10);
    EXPECT_NEAR(k.h2, 0.5, 1e-10);
    EXPECT_THROW(holonomy_hamiltonians(AnnulusConnection::zero(g)), Error);
}

TEST(MomentMap, ReferenceExamples) {
    const BumpFunction chi(0.5);
    const auto r = verify_moment_map(c_std, {-1.0, 0.0, 1.0}, chi);
    EXPECT_NEAR(r.lhs[0], -1.0, 1e-6);
    EXPECT_NEAR(r.rhs[0], -1.0, 1e-9);
    EXPECT_LE(r.max_rel_err, 1e-6);
    const auto s = verify_moment_map(c_std, {0.0, 1.0, -1.0}, chi);
    EXPECT_NEAR(s.lhs[1], -1.0, 1e-6);
    EXPECT_NEAR(s.rhs[1], -1.0, 1e-9);
    const auto z = verify_moment_map(c_std, {0.0, 0.0, 0.0}, chi);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(z.lhs[i], 0.0);
        EXPECT_EQ(z.rhs[i], 0.0);
    }
    EXPECT_EQ(z.max_rel_err, 0.0);
}

TEST(MomentMap, RandomPairsAndSupportIndependence) {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 4; ++trial) {
        const DiagPositive c = random_chamber(rng);
        const auto zeta = random_zeta(rng);
        std::array<double, 2> first{};
        for (double eps : {0.25, 0.5, 0.75}) {
            const auto r = verify_moment_map(c, zeta, BumpFunction(eps));
            for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(r.lhs[i], r.expected[i], 1e-5);
            EXPECT_LE(r.max_rel_err, 1e-4);
            if (eps == 0.25) first = r.lhs;
            for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(r.lhs[i], first[i], 1e-5);
        }
    }
}

TEST(MomentMap, ChamberExit) {
    try {
        verify_moment_map(c_std, {0.0, 1e4, -1e4}, BumpFunction(0.5));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::domain);
    }
}
