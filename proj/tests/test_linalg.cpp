#include <random>

#include <gtest/gtest.h>

#include "operslab/linalg.hpp"

using namespace operslab;

namespace {

Mat3 random_group(std::mt19937& rng) {
    std::normal_distribution<double> d;
    Mat3 m;
    do {
        for (auto& x : m.a) x = d(rng);
    } while (std::abs(det(m)) < 0.2);
    if (det(m) < 0) m(0, 0) *= -1, m(0, 1) *= -1, m(0, 2) *= -1;
    return GroupElem::normalized(m).matrix();
}

}  // namespace

TEST(GramSchmidt, OrthonormalInputIsFixed) {
    const auto f = gram_schmidt_flag({1, 0, 0}, {0, 1, 0}, {0, 0, 1});
    EXPECT_LT(max_abs(f.frame() - Mat3::identity()), 1e-15);
}

TEST(GramSchmidt, ProjectionRemovesLowerComponents) {
    EXPECT_LT(max_abs(gram_schmidt_flag({1, 0, 0}, {1, 1, 0}, {0, 0, 1}).frame() - Mat3::identity()), 1e-15);
    EXPECT_LT(max_abs(gram_schmidt_flag({2, 0, 0}, {-1, 1, 0}, {0, 0, 1}).frame() - Mat3::identity()), 1e-15);
}

TEST(GramSchmidt, NestedSpansAndIdempotence) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat3 b = random_group(rng);
        const Mat3 q = gram_schmidt_flag(b.column(0), b.column(1), b.column(2)).frame();
        // q^T b is upper triangular with positive diagonal
        const Mat3 r = transpose(q) * b;
        EXPECT_NEAR(r(1, 0), 0.0, 1e-12);
        EXPECT_NEAR(r(2, 0), 0.0, 1e-12);
        EXPECT_NEAR(r(2, 1), 0.0, 1e-12);
        for (int i = 0; i < 3; ++i) EXPECT_GT(r(i, i), 0.0);
        const Mat3 again = gram_schmidt_flag(q.column(0), q.column(1), q.column(2)).frame();
        EXPECT_LT(max_abs(again - q), 1e-14);
    }
}

TEST(GramSchmidt, DegenerateFrameThrows) {
    try {
        gram_schmidt_flag({1, 0, 0}, {2, 0, 0}, {0, 0, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::degenerate_frame);
    }
    EXPECT_THROW(gram_schmidt_flag({1, 0, 0}, {0, 0, 1}, {0, 1, 0}), Error);
}

TEST(Classify, DiagonalInput) {
    const auto s = classify_positive_hyperbolic(Mat3::diag(std::exp(-1.0), 1.0, std::exp(1.0)));
    ASSERT_TRUE(s);
    EXPECT_NEAR(s->exponents.c1(), -1.0, 1e-14);
    EXPECT_NEAR(s->exponents.c2(), 0.0, 1e-14);
    EXPECT_NEAR(s->exponents.c3(), 1.0, 1e-14);
    EXPECT_LT(max_abs(s->eigenframe - Mat3::identity()), 1e-14);
}

TEST(Classify, RepeatedOrComplexIsAbsent) {
    EXPECT_FALSE(classify_positive_hyperbolic(Mat3::identity()));
    const double c = std::cos(0.3), s = std::sin(0.3);
    Mat3 rot = Mat3::identity();
    rot(0, 0) = c, rot(0, 1) = -s, rot(1, 0) = s, rot(1, 1) = c;
    EXPECT_FALSE(classify_positive_hyperbolic(rot));
    EXPECT_FALSE(classify_positive_hyperbolic(Mat3::diag(-2.0, -0.5, 1.0)));
}

TEST(Classify, ConjugationInvariance) {
    std::mt19937 rng(11);
    const Mat3 d = Mat3::diag(std::exp(-1.0), 1.0, std::exp(1.0));
    for (int trial = 0; trial < 100; ++trial) {
        const Mat3 p = random_group(rng);
        const Mat3 g = p * d * inverse(p);
        const auto s = classify_positive_hyperbolic(g);
        ASSERT_TRUE(s);
        EXPECT_NEAR(s->exponents.c1(), -1.0, 1e-8);
        EXPECT_NEAR(s->exponents.c2(), 0.0, 1e-8);
        EXPECT_NEAR(s->exponents.c3(), 1.0, 1e-8);
        for (int i = 0; i < 3; ++i) {
            const Vec3 v = s->eigenframe.column(i);
            const Vec3 gv = g * v;
            EXPECT_LT(norm(gv - std::exp(s->exponents.exponents()[static_cast<std::size_t>(i)]) * v), 1e-7);
        }
    }
}

TEST(Triangle, StandardFrame) {
    const Mat3 e = Mat3::identity();
    auto t = triangle_of(SpherePoint({1, 1, 1}), e);
    EXPECT_EQ(t.signs, (std::array<int, 3>{1, 1, 1}));
    EXPECT_TRUE(t.positive);
    t = triangle_of(SpherePoint({-1, 1, 1}), e);
    EXPECT_EQ(t.signs, (std::array<int, 3>{-1, 1, 1}));
    EXPECT_FALSE(t.positive);
    t = triangle_of(SpherePoint({-1, -1, -1}), e);
    EXPECT_EQ(t.signs, (std::array<int, 3>{-1, -1, -1}));
    EXPECT_FALSE(t.positive);
}

TEST(Triangle, BoundaryThrows) {
    try {
        triangle_of(SpherePoint({1, 0, 1}), Mat3::identity());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::boundary);
    }
}

TEST(Triangle, DiagonalFlowPreservesTriangle) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 v{u(rng), u(rng), u(rng)};
        const auto before = triangle_of(SpherePoint(v), Mat3::identity());
        const double s = 3.0 * u(rng);
        const Vec3 w = Mat3::diag(std::exp(-s), 1.0, std::exp(s)) * v;
        const auto after = triangle_of(SpherePoint(w), Mat3::identity());
        EXPECT_EQ(before.signs, after.signs);
        EXPECT_EQ(before.positive, after.positive);
    }
}

TEST(Types, Invariants) {
    EXPECT_THROW(GroupElem(Mat3::diag(2, 1, 1)), Error);
    EXPECT_NO_THROW(GroupElem(Mat3::diag(2, 0.5, 1)));
    EXPECT_THROW(AlgElem(Mat3::diag(1, 0, 0)), Error);
    EXPECT_NO_THROW(AlgElem{cartan_xi1()});
    EXPECT_NO_THROW(AlgElem{cartan_xi2()});
    EXPECT_THROW(SpherePoint({0, 0, 0}), Error);
    EXPECT_NEAR(norm(SpherePoint({3, 4, 0}).vec()), 1.0, 1e-15);
    EXPECT_THROW(OrientedFlag(Mat3::diag(1, 1, -1)), Error);
    EXPECT_THROW(DiagPositive::from_triple(1, 1, 1), Error);
    const auto c = DiagPositive::from_triple(-1, 0, 1);
    EXPECT_TRUE(c.in_positive_chamber());
    EXPECT_FALSE(DiagPositive(0.5, 0.0).in_positive_chamber());
    EXPECT_DOUBLE_EQ(trace_pairing(cartan_xi1(), c.log_matrix()), 1.0);
}

TEST(Exponential, ExpLogRoundTrip) {
    const Mat3 x = 0.3 * (Mat3::unit(0, 1) - Mat3::unit(1, 0)) + Mat3::diag(0.2, -0.1, -0.1);
    EXPECT_LT(max_abs(logm(expm(x)) - x), 1e-12);
    EXPECT_NEAR(det(expm(x)), 1.0, 1e-14);
}
