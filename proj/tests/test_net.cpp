#include "support.hpp"

#include "mcbound/errors.hpp"
#include "mcbound/net.hpp"
#include "mcbound/poly2d.hpp"

#include <doctest.h>

#include <set>

using namespace mcbound;
using namespace testsupport;

namespace {

const ClassPair kAB = ClassPair::of(ClassId{0}, ClassId{1});
const Rect kBox{-2, -2, 2, 2};

EdgeNetwork square_loop() {
    return build_network({{{0, 0}, {1, 0}, kAB}, {{1, 0}, {1, 1}, kAB}, {{1, 1}, {0, 1}, kAB}, {{0, 1}, {0, 0}, kAB}},
                         kBox);
}

} // namespace

TEST_CASE("build_network") {
    CHECK(build_network({}, kBox).vertices.empty());

    const auto two = build_network({{{0, 0}, {1, 0}, kAB}, {{1, 0}, {1, 1}, kAB}}, kBox);
    CHECK(two.vertices.size() == 3);
    CHECK(two.segments.size() == 2);
    const auto deg = two.degrees();
    CHECK(std::count(deg.begin(), deg.end(), 2u) == 1);

    const auto dup = build_network({{{0, 0}, {1, 1}, kAB}, {{1, 1}, {0, 0}, kAB}, {{2, 2}, {2, 2}, kAB}}, kBox);
    CHECK(dup.segments.size() == 1);
    CHECK(dup.warnings.size() == 1);

    const auto border = build_network({{{-2, 0}, {0, 0}, kAB}}, kBox);
    CHECK(border.vertices[0].kind == VertexKind::BorderTerminal);
    CHECK(border.vertices[1].kind == VertexKind::EdgeRoot);

    const auto j = build_network({{{0, 0}, {1, 0}, kAB}}, kBox, {{0, 0}});
    CHECK(j.vertices[0].kind == VertexKind::Junction);
}

TEST_CASE("collinear overlaps cancel in pairs") {
    // the same stretch traced twice with different breakpoints
    const auto net = build_network({{{0, 0}, {0, 1}, kAB}, {{0, 0.5}, {0, 1.5}, kAB}, {{-2, 0}, {0, 0}, kAB},
                                    {{0, 1}, {2, 1}, kAB}, {{0, 0.5}, {2, 0.5}, kAB}, {{0, 1.5}, {2, 1.5}, kAB}},
                                   kBox);
    CHECK(net.warnings.size() == 1);
    CHECK(brute_watertight(net).odd == 0);
    CHECK(brute_watertight(net).crossings == 0);
    CHECK(check_watertight(net).crossings.empty());
}

TEST_CASE("check_watertight") {
    CHECK(check_watertight(square_loop()).watertight());

    const auto dangling = build_network({{{0, 0}, {1, 0}, kAB}}, kBox);
    const auto r = check_watertight(dangling);
    CHECK(r.odd_vertices.size() == 2);
    CHECK_FALSE(r.watertight());

    const auto x = build_network({{{-1, -1}, {1, 1}, kAB}, {{-1, 1}, {1, -1}, kAB}}, kBox);
    const auto rx = check_watertight(x);
    CHECK(rx.crossings.size() == 1);

    const auto bad = build_network({{{0, 0}, {1, 0}, kAB}, {{0, 0}, {0, 1}, kAB}}, kBox, {{0, 0}});
    CHECK(check_watertight(bad).bad_junctions.size() == 1);
}

TEST_CASE("property: check_watertight agrees with an independent checker") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> coord(-3, 3);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<BoundarySegment> segs;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            segs.push_back({{coord(rng) * 0.5, coord(rng) * 0.5}, {coord(rng) * 0.5, coord(rng) * 0.5}, kAB});
        }
        // keep only non-axis segments so no collinear cancelling happens
        std::erase_if(segs, [](const BoundarySegment& s) { return s.p0.x == s.p1.x || s.p0.y == s.p1.y; });
        const auto net = build_network(segs, kBox);
        const auto mine = check_watertight(net);
        const auto ref = brute_watertight(net);
        CHECK(mine.odd_vertices.size() == ref.odd);
        CHECK(mine.crossings.size() == ref.crossings);
    }
}

TEST_CASE("segments_cross") {
    CHECK(segments_cross({0, 0}, {1, 1}, {0, 1}, {1, 0}));
    CHECK_FALSE(segments_cross({0, 0}, {1, 0}, {1, 0}, {2, 1}));
    CHECK(segments_cross({0, 0}, {2, 0}, {1, 0}, {3, 0}));
    CHECK(segments_cross({0, 0}, {2, 0}, {2, 0}, {1, 0}));
    CHECK(segments_cross({0, 0}, {2, 0}, {1, 0}, {1, 1}));
    CHECK(point_segment_distance({0, 1}, {-1, 0}, {1, 0}) == 1.0);
    CHECK(point_segment_distance({3, 0}, {-1, 0}, {1, 0}) == 2.0);
}

TEST_CASE("json round trip") {
    const EdgeNetwork empty = build_network({}, kBox);
    const std::string ej = to_json(empty);
    CHECK(ej.find("\"segments\": []") != std::string::npos);
    CHECK(to_json(network_from_json(ej)) == ej);

    auto f = make_field(generate_field_spec(FieldKind::SmoothedVoronoi, 5, 3));
    PolygoniseParams params;
    params.delta = 1e-2;
    const auto net = polygonise(*f, {0, 0, 1, 1}, params).network;
    const std::string a = to_json(net);
    const std::string b = to_json(network_from_json(a));
    CHECK(a == b);

    CHECK_THROWS_AS(network_from_json("[]"), ParseError);
    CHECK_THROWS_AS(network_from_json(R"({"bounds":[0,0,1,1],"vertices":[],"segments":[{"v0":0,"v1":1,"class_a":0,"class_b":1}],"warnings":[]})"),
                    ParseError);
}

TEST_CASE("svg") {
    const std::string empty = to_svg(build_network({}, kBox));
    CHECK(empty.find("<svg") != std::string::npos);
    CHECK(empty.find("<path") == std::string::npos);

    auto planes = linear_planes({{1, 0, 0}, {0, 1, 0}, {-1, -1, 0}});
    const auto net = polygonise(*planes, {-1, -1, 1, 1}, PolygoniseParams{}).network;
    const std::string svg = to_svg(net);
    std::set<std::string> strokes;
    std::size_t pos = 0;
    while ((pos = svg.find("<path", pos)) != std::string::npos) {
        pos = svg.find("stroke=\"", pos) + 8;
        strokes.insert(svg.substr(pos, svg.find('"', pos) - pos));
    }
    CHECK(strokes.size() == 3);
    CHECK(svg.find("<circle") != std::string::npos);
}
