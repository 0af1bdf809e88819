#include "support.hpp"

#include "mcbound/errors.hpp"

#include <doctest.h>

#include <atomic>

using namespace mcbound;
using namespace testsupport;

namespace {

class CountingField final : public MultiClassField {
public:
    explicit CountingField(const MultiClassField& inner) : inner_(inner) {}
    std::size_t class_count() const override { return inner_.class_count(); }
    void evaluate_into(Point2 p, std::span<double> out) const override {
        ++count;
        inner_.evaluate_into(p, out);
    }
    std::optional<Vec2> analytic_gradient(Point2 p, ClassId c) const override { return inner_.analytic_gradient(p, c); }

    mutable std::atomic<std::size_t> count{0};

private:
    const MultiClassField& inner_;
};

// Tangents of x^2 at t_i = i / (k - 1): class i wins on [(t_{i-1} + t_i) / 2, (t_i + t_{i+1}) / 2].
std::unique_ptr<MultiClassField> tangent_fan(std::size_t k) {
    std::vector<std::array<double, 3>> planes;
    for (std::size_t i = 0; i < k; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(k - 1);
        planes.push_back({2.0 * t, 0.0, -t * t});
    }
    return linear_planes(planes);
}

LineFunction affine(double a, double b) {
    return {[=](double x) { return a * x + b; }, [=](double) { return a; }};
}

const AxisLine kXAxis{Axis::X, 0.0};

} // namespace

TEST_CASE("bracketing on the three-plane line field") {
    auto f = figure2_field();
    CHECK(classify_interval(*f, kXAxis, {-4, 0}) == IntervalClass::consistent(ClassId{0}));
    CHECK(classify_interval(*f, kXAxis, {0, 2}) == IntervalClass::potential_root(ClassId{0}, ClassId{1}));
    CHECK(classify_interval(*f, kXAxis, {0, 4}).tag == IntervalClass::Tag::Ambiguous);
    CHECK(classify_interval(*f, kXAxis, {-4, 4}).tag == IntervalClass::Tag::Ambiguous);
    CHECK(classify_interval(*f, kXAxis, {2, 4}) == IntervalClass::consistent(ClassId{1}));
}

TEST_CASE("gradient localisation") {
    SUBCASE("linear through zero") {
        const auto lk = gradient_localisation(affine(1, 0), {-1, 1});
        CHECK(lk.tag == RootLikelihood::Tag::DefiniteWithin);
        CHECK(*lk.x1_star == 0.0);
        CHECK(*lk.x2_star == 0.0);
    }
    SUBCASE("shallow slope projects far away") {
        const auto lk = gradient_localisation(affine(0.01, 1), {0, 1});
        CHECK(lk.tag == RootLikelihood::Tag::Unlikely);
        CHECK(*lk.x1_star == doctest::Approx(-100));
    }
    SUBCASE("root just outside") {
        const auto lk = gradient_localisation(affine(50, -55), {0, 1});
        CHECK(lk.tag == RootLikelihood::Tag::PossibleNear);
        CHECK(*lk.x2_star > 1.0);
        CHECK(*lk.x2_star <= 2.0);
    }
    SUBCASE("flat derivative drops the projection") {
        const LineFunction g{[](double x) { return x < 0.5 ? 1.0 : -1.0 + 0.0 * x; }, [](double) { return 0.0; }};
        const auto lk = gradient_localisation(g, {0, 1});
        CHECK_FALSE(lk.x1_star.has_value());
        CHECK_FALSE(lk.x2_star.has_value());
        CHECK(lk.tag == RootLikelihood::Tag::PossibleNear);
    }
}

TEST_CASE("refine_root") {
    const double eps = 1e-12;
    CHECK(std::abs(refine_root(affine(1, 0), {-1, 1}, eps)) <= eps);

    const LineFunction cubic{[](double x) { return x * x * x; }, [](double x) { return 3 * x * x; }};
    CHECK(std::abs(refine_root(cubic, {-1, 2}, eps)) <= eps);

    auto s = sigmoid({0.37});
    CHECK(std::abs(refine_root(*s, kXAxis, {0, 1}, ClassId{0}, ClassId{1}, eps) - 0.37) <= eps);

    auto f = figure2_field();
    CHECK(std::abs(refine_root(*f, kXAxis, {0, 2}, ClassId{0}, ClassId{1}, eps) - 1.0) <= eps);

    const LineFunction no_root{[](double x) { return 1 + x * x; }, [](double x) { return 2 * x; }};
    CHECK_THROWS_AS(refine_root(no_root, {0.5, 1}, eps), RefinementFailure);
}

TEST_CASE("verification node counts") {
    auto f = figure2_field();
    for (int vn = 1; vn <= 6; ++vn) {
        const auto v = verify_interval(*f, kXAxis, {-4, 0}, IntervalClass::consistent(ClassId{0}), vn);
        CHECK(v.nodes == (std::size_t{1} << (vn + 1)) - 2);
        CHECK(v.verified);
    }
    const auto v = verify_interval(*f, kXAxis, {0, 2}, IntervalClass::potential_root(ClassId{0}, ClassId{1}), 2);
    CHECK(v.nodes == 6);
    CHECK(v.verified);
    REQUIRE(v.root_leaf.has_value());
    CHECK(v.root_leaf->lo <= 1.0);
    CHECK(v.root_leaf->hi >= 1.0);

    ConstantField c({0.2, 0.5, 0.3});
    for (int vn = 1; vn <= 4; ++vn) CHECK(verify_interval(c, kXAxis, {0, 1}, IntervalClass::consistent(ClassId{1}), vn).verified);

    auto twin = sigmoid({0.62, 0.63}, 4000.0);
    const auto cls = classify_interval(*twin, kXAxis, {0.25, 1.25});
    CHECK(cls.tag == IntervalClass::Tag::Consistent); // the island is invisible from the ends
    CHECK_FALSE(verify_interval(*twin, kXAxis, {0.25, 1.25}, cls, 3).verified);
}

TEST_CASE("find_roots on closed-form partitions") {
    SUBCASE("fourteen classes") {
        auto f = tangent_fan(14);
        const auto scan = find_roots(*f, kXAxis, {-0.1, 1.1}, 2, 1e-12);
        REQUIRE(scan.roots.size() == 13);
        for (std::size_t i = 0; i < 13; ++i) {
            CHECK(scan.roots[i].position == doctest::Approx((2.0 * i + 1) / 26.0).epsilon(1e-10));
            CHECK(scan.roots[i].left_class == ClassId{static_cast<std::uint32_t>(i)});
            CHECK(scan.roots[i].right_class == ClassId{static_cast<std::uint32_t>(i + 1)});
        }
        CHECK(scan.warnings.empty());
    }
    SUBCASE("constant") {
        ConstantField c({0.6, 0.4});
        CHECK(find_roots(c, kXAxis, {0, 1}, 2, 1e-12).roots.empty());
    }
    SUBCASE("three-plane line") {
        auto f = figure2_field();
        const auto scan = find_roots(*f, kXAxis, {-4, 6}, 2, 1e-12);
        REQUIRE(scan.roots.size() == 2);
        CHECK(std::abs(scan.roots[0].position - 1.0) <= 1e-12);
        // B = C at 0.5x - 1.5 = 1.2x - 4.8
        CHECK(std::abs(scan.roots[1].position - 3.3 / 0.7) <= 1e-9);
    }
    SUBCASE("rejects bad input") {
        auto f = figure2_field();
        CHECK_THROWS_AS(find_roots(*f, kXAxis, {1, 1}, 2, 1e-12), InvalidInput);
        CHECK_THROWS_AS(find_roots(*f, kXAxis, {0, 1}, 0, 1e-12), InvalidInput);
        CHECK_THROWS_AS(find_roots(*f, kXAxis, {0, 1}, 2, 0.0), InvalidInput);
    }
}

TEST_CASE("find_roots queue discipline") {
    auto f = tangent_fan(6);
    std::vector<RootTraceEvent> events;
    find_roots(*f, kXAxis, {0, 1}, 2, 1e-12, [&](const RootTraceEvent& e) { events.push_back(e); });
    REQUIRE_FALSE(events.empty());
    for (const auto& e : events) {
        // the normal queue is served only when the verification queue is empty
        if (e.queue == RootTraceEvent::Queue::Normal) CHECK(e.verification_size == 0);
    }
}

TEST_CASE("property: find_roots matches a dense scan on random voronoi lines") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t k = 3 + rng() % 12;
        auto f = make_field(generate_field_spec(FieldKind::SmoothedVoronoi, k, rng()));
        const AxisLine line = random_line(rng);
        const auto scan = find_roots(*f, line, {0, 1}, 2, 1e-10);
        const auto oracle = dense_scan_roots(*f, line, 0, 1, 20000, 1e-13);
        REQUIRE(scan.roots.size() == oracle.size());
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(std::abs(scan.roots[i].position - oracle[i].position) <= 1e-10);
            CHECK(scan.roots[i].left_class == oracle[i].left);
            CHECK(scan.roots[i].right_class == oracle[i].right);
        }
    }
}

TEST_CASE("root cache") {
    auto s = sigmoid({0.75});
    RootCache cache;
    const auto a = cache.query(*s, kXAxis, {0, 1}, 2, 1e-12);
    const auto b = cache.query(*s, kXAxis, {0.5, 1.5}, 2, 1e-12);
    REQUIRE(a.roots.size() == 1);
    REQUIRE(b.roots.size() == 1);
    CHECK(a.roots[0].position == b.roots[0].position);
    CHECK(a.start_class == ClassId{0});
    CHECK(b.start_class == ClassId{0});

    CountingField counted(*s);
    RootCache fresh;
    fresh.query(counted, kXAxis, {0, 1}, 2, 1e-12);
    const std::size_t after_first = counted.count;
    CHECK(after_first > 0);
    const auto again = fresh.query(counted, kXAxis, {0, 1}, 2, 1e-12);
    const auto inner = fresh.query(counted, kXAxis, {0.2, 0.9}, 2, 1e-12);
    CHECK(counted.count == after_first);
    CHECK(fresh.finder_runs() == 1);
    CHECK(again.roots.size() == 1);
    CHECK(inner.roots[0].position == again.roots[0].position);
}

TEST_CASE("root cache keeps one class function per line") {
    // an island too narrow for a coarse scan of [0, 1], visible to a scan of [0.4, 0.6]
    auto twin = sigmoid({0.54, 0.56}, 4000.0);
    RootCache cache;
    const auto narrow = cache.query(*twin, kXAxis, {0.4, 0.6}, 2, 1e-12);
    REQUIRE(narrow.roots.size() == 2);
    const auto wide = cache.query(*twin, kXAxis, {0, 1}, 2, 1e-12);
    // every reported root flips the class, and consecutive flanks agree
    ClassId c = wide.start_class;
    for (const auto& r : wide.roots) {
        CHECK(r.left_class == c);
        CHECK(r.right_class != r.left_class);
        c = r.right_class;
    }
    CHECK(c == twin->classify({1.0, 0.0}));
}
