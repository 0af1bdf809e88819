#include "support.hpp"

#include "mcbound/errors.hpp"
#include "mcbound/oracle.hpp"
#include "mcbound/poly2d.hpp"

#include <doctest.h>

#include <set>

using namespace mcbound;
using namespace testsupport;

namespace {

const Rect kUnit{0, 0, 1, 1};

EdgeTransitions edges_of(const MultiClassField& f, const Rect& r, double eps = 1e-12) {
    RootCache cache;
    return collect_edge_transitions(cache, f, r, 2, eps);
}

// A two-class split at x = 0.5 with a small island of a third class near (0.25, 0.5).
FieldSpec island_spec() {
    FieldSpec spec;
    spec.kind = FieldKind::SoftmaxRbf;
    spec.k = 3;
    ClassParams left{{{-1.0, 0.5}}, {1.0}, 1.0, 0.0};
    ClassParams right{{{2.0, 0.5}}, {1.0}, 1.0, 0.0};
    ClassParams island{{{0.25, 0.5}}, {3.0}, 0.05, 0.0};
    spec.classes = {left, right, island};
    return spec;
}

std::size_t total_roots(const EdgeTransitions& et) {
    std::size_t n = 0;
    for (const auto& e : et.edges) n += e.size();
    return n;
}

} // namespace

TEST_CASE("edge transitions") {
    SUBCASE("inside one voronoi cell") {
        auto f = make_field(generate_field_spec(FieldKind::SmoothedVoronoi, 5, 8));
        // a tiny box around a point is far from every cell wall
        const Point2 c{0.5, 0.5};
        const Rect r{c.x - 1e-6, c.y - 1e-6, c.x + 1e-6, c.y + 1e-6};
        const auto et = edges_of(*f, r, 1e-15);
        CHECK(total_roots(et) == 0);
    }
    SUBCASE("vertical boundary") {
        auto f = sigmoid({0.5});
        const auto et = edges_of(*f, kUnit);
        REQUIRE(et.edges[0].size() == 1);
        REQUIRE(et.edges[2].size() == 1);
        CHECK(et.edges[1].empty());
        CHECK(et.edges[3].empty());
        CHECK(std::abs(et.edges[0][0].position - 0.5) <= 1e-12);
        CHECK(et.edges[0][0].position == et.edges[2][0].position);
    }
    SUBCASE("three planes, one root per edge on three edges") {
        auto f = linear_planes({{1, 0, 0}, {0, 1, 0}, {-1, -1, 0}});
        const Rect r{-1, -1, 1, 1};
        const auto et = edges_of(*f, r);
        std::size_t n = 0;
        for (int e = 0; e < 4; ++e) {
            const AxisLine line = edge_line(r, e);
            const Interval1D iv = edge_interval(r, e);
            const auto oracle = dense_scan_roots(*f, line, iv.lo, iv.hi, 100000, 1e-14);
            REQUIRE(et.edges[e].size() == oracle.size());
            for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(std::abs(et.edges[e][i].position - oracle[i].position) <= 1e-11);
            n += oracle.size();
        }
        CHECK(n == 3);
    }
}

TEST_CASE("rectangle classification") {
    ConstantField c({0.3, 0.7});
    CHECK(classify_rectangle(edges_of(c, kUnit)).tag == RectTag::Polygonisable);

    auto vertical = sigmoid({0.5});
    CHECK(classify_rectangle(edges_of(*vertical, kUnit)).tag == RectTag::Polygonisable);

    auto saddle = make_field(saddle_spec());
    const Rect around{0.2, 0.2, 0.8, 0.8};
    const auto et = edges_of(*saddle, around);
    CHECK(boundary_transitions(et).size() == 4);
    CHECK(classify_rectangle(et).tag == RectTag::Ambiguous);

    auto planes = linear_planes({{1, 0, 0}, {0, 1, 0}, {-1, -1, 0}});
    const auto tdm = classify_rectangle(edges_of(*planes, {-1, -1, 1, 1}));
    CHECK(tdm.tag == RectTag::TDM);
    std::vector<std::uint32_t> ids{tdm.classes[0].index, tdm.classes[1].index, tdm.classes[2].index};
    std::sort(ids.begin(), ids.end());
    CHECK(ids == std::vector<std::uint32_t>{0, 1, 2});

    // two roots on one edge is left to subdivision
    auto stripes = sigmoid({0.3, 0.7});
    const auto two = edges_of(*stripes, kUnit);
    CHECK(boundary_transitions(two).size() == 4);
    CHECK(classify_rectangle(two).tag == RectTag::Ambiguous);
    CHECK(classify_rectangle(edges_of(*stripes, {0, 0, 0.5, 1})).tag == RectTag::Polygonisable);

    auto three = sigmoid({0.2, 0.5, 0.8});
    CHECK(classify_rectangle(edges_of(*three, kUnit)).tag == RectTag::Ambiguous);
}

TEST_CASE("select_split") {
    CHECK(select_split({0.2, 0.4, 0.8}, 0, 1, 1e-12) == doctest::Approx(0.6));
    CHECK(select_split({0.25, 0.75}, 0, 1, 1e-12) == doctest::Approx(0.5));
    CHECK(select_split({}, 0, 2, 1e-12) == 1.0);
    CHECK(select_split({0.3}, 0, 1, 1e-12) == 0.5);
    // ties go to the lower index: M = {0.2, 0.5, 0.8}, odd -> middle
    CHECK(select_split({0.1, 0.3, 0.7, 0.9}, 0, 1, 1e-12) == doctest::Approx(0.5));
    // M = {0.15, 0.35, 0.55, 0.75}, gaps equal -> lower of the two middles
    CHECK(select_split({0.1, 0.2, 0.5, 0.6, 0.9}, 0, 1, 1e-12) == doctest::Approx(0.35));
}

TEST_CASE("choose_subdivision honours the roots on the parallel edges") {
    auto stripes = sigmoid({0.2, 0.4, 0.8});
    const auto et = edges_of(*stripes, kUnit);
    const auto choice = choose_subdivision(et, Axis::X, 1e-12);
    CHECK(choice.axis == Axis::X);
    CHECK(choice.position == doctest::Approx(0.6).epsilon(1e-9));

    // too thin along x: falls back to y
    const auto thin = edges_of(*stripes, {0.5, 0, 0.5 + 1e-13, 1}, 1e-13);
    CHECK(choose_subdivision(thin, Axis::X, 1e-13).axis == Axis::Y);
}

TEST_CASE("rectangle verification") {
    ConstantField c({0.4, 0.6});
    RootCache cache;
    const RectClass uniform{RectTag::Polygonisable, {}};
    for (int vn = 1; vn <= 4; ++vn) {
        const auto v = verify_rectangle(cache, c, kUnit, Axis::X, uniform, vn, 1e-12);
        CHECK(v.verified);
        CHECK(v.nodes == (std::size_t{1} << (vn + 1)) - 2);
    }

    auto island = make_field(island_spec());
    REQUIRE(island->classify({0.25, 0.5}) == ClassId{2});
    RootCache c2;
    const auto et = collect_edge_transitions(c2, *island, kUnit, 2, 1e-12);
    const auto cls = classify_rectangle(et);
    REQUIRE(cls.tag == RectTag::Polygonisable);
    CHECK(boundary_transitions(et).size() == 2);
    CHECK_FALSE(verify_rectangle(c2, *island, kUnit, Axis::X, cls, 2, 1e-12).verified);
}

TEST_CASE("geometric criterion") {
    auto circle = make_field(circle_spec());
    const double s = std::sqrt(3.0) / 2.0;
    const BoundarySegment chord{{s, -0.5}, {s, 0.5}, ClassPair::of(ClassId{0}, ClassId{1})};
    const auto d = apply_geometric_criterion(*circle, chord, 0.2);
    CHECK(d.distance == doctest::Approx(2.0 / std::sqrt(3.0) - s).epsilon(1e-9));
    CHECK(d.subdivide);
    CHECK(d.axis == Axis::Y);
    CHECK(d.position == doctest::Approx(0.0));
    CHECK_FALSE(apply_geometric_criterion(*circle, chord, 0.3).subdivide);
    CHECK_FALSE(apply_geometric_criterion(*circle, chord, std::numeric_limits<double>::infinity()).subdivide);

    auto vertical = sigmoid({0.5});
    const BoundarySegment straight{{0.5, 0.0}, {0.5, 1.0}, ClassPair::of(ClassId{0}, ClassId{1})};
    const auto keep = apply_geometric_criterion(*vertical, straight, 1e-6);
    CHECK_FALSE(keep.subdivide);
    CHECK(keep.distance == 0.0);

    ConstantField flat({0.5, 0.5});
    const auto z = apply_geometric_criterion(flat, straight, 1e-6);
    CHECK(z.zero_gradient);
    CHECK_FALSE(z.subdivide);
}

TEST_CASE("connect_edges") {
    auto vertical = sigmoid({0.5});
    const auto et = edges_of(*vertical, kUnit);
    const auto segs = connect_edges(et, classify_rectangle(et));
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].pair == ClassPair::of(ClassId{0}, ClassId{1}));
    CHECK(std::min(segs[0].p0.y, segs[0].p1.y) == 0.0);
    CHECK(std::max(segs[0].p0.y, segs[0].p1.y) == 1.0);

    auto planes = linear_planes({{1, 0, 0}, {0, 1, 0}, {-1, -1, 0}});
    const Rect r{-1, -1, 1, 1};
    const auto t = edges_of(*planes, r);
    const auto tdm = connect_edges(t, classify_rectangle(t), Point2{0, 0});
    REQUIRE(tdm.size() == 3);
    std::set<ClassPair> pairs;
    for (const auto& s : tdm) {
        CHECK(s.p1 == Point2{0, 0});
        pairs.insert(s.pair);
    }
    CHECK(pairs.size() == 3);
    CHECK_THROWS_AS(connect_edges(t, classify_rectangle(t)), InvalidInput);

    ConstantField c({0.5, 0.2, 0.3});
    const auto empty = edges_of(c, kUnit);
    CHECK(connect_edges(empty, classify_rectangle(empty)).empty());

    auto saddle = make_field(saddle_spec());
    const auto amb = edges_of(*saddle, {0.2, 0.2, 0.8, 0.8});
    CHECK_THROWS_AS(connect_edges(amb, classify_rectangle(amb)), InternalConsistency);
    CHECK(connect_best_effort(amb).size() == 2);
}

TEST_CASE("polygonise basics") {
    PolygoniseParams params;
    params.delta = 1e-3;

    ConstantField c({0.1, 0.9});
    const auto empty = polygonise(c, kUnit, params);
    CHECK(empty.network.segments.empty());
    CHECK(empty.rectangles_processed == 1);

    auto vertical = sigmoid({0.5});
    const auto res = polygonise(*vertical, kUnit, params);
    CHECK(check_watertight(res.network).watertight());
    const auto deg = res.network.degrees();
    std::size_t border = 0;
    for (const auto& v : res.network.vertices) {
        CHECK(std::abs(v.position.x - 0.5) <= 1e-12);
        if (v.kind == VertexKind::BorderTerminal) {
            ++border;
            CHECK(deg[v.id] == 1);
        } else {
            CHECK(deg[v.id] == 2);
        }
    }
    CHECK(border == 2);

    CHECK_THROWS_AS(polygonise(c, kUnit, PolygoniseParams{2, 1e-3, 2.0, 50, 500, {}}), InvalidInput);
    CHECK_THROWS_AS(polygonise(c, kUnit, PolygoniseParams{2, 0.0, 1e-12, 50, 500, {}}), InvalidInput);
}

TEST_CASE("polygonise stack discipline") {
    auto f = make_field(generate_field_spec(FieldKind::SmoothedVoronoi, 6, 5));
    std::vector<PolyTraceEvent> events;
    PolygoniseParams params;
    params.delta = 1e-2;
    params.trace = [&](const PolyTraceEvent& e) { events.push_back(e); };
    const auto res = polygonise(*f, kUnit, params);
    CHECK(events.size() == res.rectangles_processed);
    bool saw_normal = false;
    for (const auto& e : events) {
        if (e.stack == PolyTraceEvent::Stack::Normal) {
            saw_normal = true;
            CHECK(e.verification_size == 0);
            CHECK(e.tag != RectTag::Polygonisable);
        }
    }
    CHECK(saw_normal);
}

TEST_CASE("island hidden from the edges is recovered") {
    auto island = make_field(island_spec());
    PolygoniseParams params;
    params.delta = 1e-3;
    const auto res = polygonise(*island, kUnit, params);
    CHECK(check_watertight(res.network).watertight());
    CHECK(res.verification_failures > 0);
    const auto grid = rasterize(*island, kUnit, 400, 400);
    CHECK(region_agreement(res.network, grid, 2e-12).fraction >= 0.999);
}

TEST_CASE("linear planes junction lands on the analytic point") {
    auto planes = linear_planes({{1, 0, 0}, {0, 1, 0}, {-1, -1, 0}});
    const auto res = polygonise(*planes, {-1, -1, 1, 1}, PolygoniseParams{});
    CHECK(res.junctions == 1);
    std::size_t junctions = 0;
    for (const auto& v : res.network.vertices) {
        if (v.kind != VertexKind::Junction) continue;
        ++junctions;
        CHECK(norm(v.position) <= 1e-12);
    }
    CHECK(junctions == 1);
    CHECK(check_watertight(res.network).watertight());
}

TEST_CASE("property: random fields give watertight networks") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 8; ++trial) {
        const auto kind = trial % 2 == 0 ? FieldKind::SmoothedVoronoi : FieldKind::SoftmaxRbf;
        auto f = make_field(generate_field_spec(kind, 3 + rng() % 8, rng()));
        PolygoniseParams params;
        params.delta = 1e-3;
        const auto res = polygonise(*f, kUnit, params);
        CHECK(check_watertight(res.network).watertight());
        CHECK(brute_watertight(res.network).ok());
    }
}
