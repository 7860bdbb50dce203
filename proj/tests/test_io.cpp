#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "operslab/io.hpp"
#include "operslab/svg.hpp"
#include "support.hpp"

using namespace operslab;
using namespace testsupport;
using io::json;

namespace {

template <class T, class Read>
T round_trip(const T& value, Read read) {
    const std::string text = io::to_json(value).dump();
    const json j = io::parse(text, "doc");
    return read(io::Field(j, "$"));
}

std::string schema_message(const json& j, void (*read)(const io::Field&)) {
    try {
        read(io::Field(j, "$"));
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::schema);
        return e.what();
    }
    ADD_FAILURE() << "no schema error";
    return {};
}

bool bitwise_equal(const Mat3& a, const Mat3& b) { return a.a == b.a; }

}  // namespace

TEST(RoundTrip, Operator) {
    const AgdOperator3 op = smooth_operator(64);
    const AgdOperator3 back = round_trip(op, io::operator_from);
    EXPECT_EQ(back.a0.values(), op.a0.values());
    EXPECT_EQ(back.a1.values(), op.a1.values());
}

TEST(RoundTrip, Hill) {
    const HillOperator h{RealSamples::from_function(32, [](double t) { return std::cos(two_pi * t) / 3.0; })};
    EXPECT_EQ(round_trip(h, io::hill_from).q.values(), h.q.values());
}

TEST(RoundTrip, Curve) {
    const QuasiPeriodicCurve c = curve_of_operator(smooth_operator(64));
    const QuasiPeriodicCurve back = round_trip(c, io::curve_from);
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        EXPECT_EQ(back[k].p, c[k].p);
        EXPECT_EQ(back[k].d1, c[k].d1);
        EXPECT_EQ(back[k].d2, c[k].d2);
    }
    EXPECT_TRUE(bitwise_equal(back.monodromy().matrix(), c.monodromy().matrix()));
}

TEST(RoundTrip, ConnectionAndGauge) {
    std::mt19937_64 rng(61);
    const LoopConnection a = companion_connection(smooth_operator(64));
    const LoopConnection a2 = round_trip(a, io::connection_from);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_TRUE(bitwise_equal(a2[k], a[k]));

    const GaugeLoop g(random_loop(rng, 0.3, true, true, 64));
    const GaugeLoop g2 = round_trip(g, io::gauge_from);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_TRUE(bitwise_equal(g2[k], g[k]));
    EXPECT_EQ(g2.winding(), g.winding());
    EXPECT_EQ(io::to_json(g)["winding"], 0);
}

TEST(RoundTrip, DeltaStructureArrow) {
    std::mt19937_64 rng(62);
    const DiagPositive c = random_chamber(rng);
    const ConvexCurveDelta d = random_convex_delta(rng, c, 64), e = random_convex_delta(rng, c, 64);
    const ConvexCurveDelta d2 = round_trip(d, io::delta_from);
    EXPECT_EQ(d2.c().c1(), c.c1());
    EXPECT_EQ(d2.c().c2(), c.c2());
    EXPECT_EQ(d2.delta().values(), d.delta().values());

    const AnnulusStructure s(d, e, AnnulusGrid(64, 33, -1, 1));
    const AnnulusStructure s2 = round_trip(s, io::structure_from);
    EXPECT_EQ(s2.delta_plus().values(), s.delta_plus().values());
    EXPECT_EQ(s2.delta_minus().values(), s.delta_minus().values());
    EXPECT_EQ(s2.grid(), s.grid());

    const json arrow = io::to_json(BoundaryArrow{e, d});
    const BoundaryArrow back = io::arrow_from(io::Field(arrow, "$"), e);
    EXPECT_EQ(back.target.delta().values(), e.delta().values());
    EXPECT_EQ(back.source.delta().values(), d.delta().values());

    json bare = arrow;
    bare.erase("source");
    EXPECT_EQ(io::arrow_from(io::Field(bare, "$"), d).source.delta().values(), d.delta().values());
}

TEST(Schema, FieldPaths) {
    json op = io::to_json(smooth_operator(16));
    op["a1"][3] = "x";
    EXPECT_NE(schema_message(op, [](const io::Field& f) { io::operator_from(f); }).find("$.a1[3]"), std::string::npos);

    op = io::to_json(smooth_operator(16));
    op.erase("a0");
    EXPECT_NE(schema_message(op, [](const io::Field& f) { io::operator_from(f); }).find("$.a0: missing"), std::string::npos);

    op = io::to_json(smooth_operator(16));
    op["n"] = 24;
    EXPECT_NE(schema_message(op, [](const io::Field& f) { io::operator_from(f); }).find("$.n"), std::string::npos);

    op = io::to_json(smooth_operator(16));
    op["type"] = "hill_operator";
    EXPECT_NE(schema_message(op, [](const io::Field& f) { io::operator_from(f); }).find("$.type"), std::string::npos);

    std::mt19937_64 rng(63);
    const DiagPositive c = random_chamber(rng);
    json s = io::to_json(AnnulusStructure(random_convex_delta(rng, c, 32), random_convex_delta(rng, c, 32), AnnulusGrid(32, 17, -1, 1)));
    s["delta_minus"]["values"].erase(0);
    EXPECT_NE(schema_message(s, [](const io::Field& f) { io::structure_from(f); }).find("$.delta_minus.values"), std::string::npos);

    json conn = io::to_json(companion_connection(smooth_operator(16)));
    conn["xi"][0] = 5.0;
    EXPECT_NE(schema_message(conn, [](const io::Field& f) { io::connection_from(f); }).find("not traceless"), std::string::npos);

    try {
        io::parse("{\"n\": ", "broken.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::schema);
    }
}

TEST(Svg, StandardCurveIsMonotoneGraph) {
    const QuasiPeriodicCurve curve = standard_curve(DiagPositive::from_triple(-1.0, 0.0, 1.0), 64);
    const std::string doc = svg::plot_curve(curve);
    EXPECT_NE(doc.find("<polyline"), std::string::npos);
    double prev_u = -1e300, prev_v = -1e300;
    int visible = 0;
    for (const Vec3& x : svg::extended_points(curve)) {
        const auto p = svg::Chart::project(x);
        ASSERT_TRUE(p);
        if (!svg::Chart().visible(*p)) continue;
        ++visible;
        EXPECT_GT(p->u, prev_u);
        EXPECT_GT(p->v, prev_v);
        prev_u = p->u;
        prev_v = p->v;
    }
    EXPECT_GT(visible, 100);
    EXPECT_NE(svg::plot_curve(curve, true).find("log scale"), std::string::npos);
    EXPECT_NE(svg::plot_triangles(curve).find("<circle"), std::string::npos);
}
