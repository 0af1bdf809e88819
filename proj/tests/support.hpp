#pragma once

// Fields, generators and brute-force oracles shared by the unit tests and the
// acceptance runner. Nothing here calls into the code under test except make_field
// and MultiClassField::classify / evaluate.

#include "mcbound/field.hpp"
#include "mcbound/net.hpp"
#include "mcbound/root1d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace testsupport {

using namespace mcbound;

inline std::unique_ptr<MultiClassField> linear_planes(const std::vector<std::array<double, 3>>& planes) {
    FieldSpec spec;
    spec.kind = FieldKind::LinearPlanes;
    spec.k = planes.size();
    for (const auto& p : planes) {
        ClassParams cp;
        cp.weights = {p[0], p[1], p[2]};
        spec.classes.push_back(cp);
    }
    return make_field(spec);
}

// The three-plane line field A = -x, B = 0.5x - 1.5, C = 1.2x - 4.8, read along y = 0.
inline std::unique_ptr<MultiClassField> figure2_field() {
    return linear_planes({{-1.0, 0.0, 0.0}, {0.5, 0.0, -1.5}, {1.2, 0.0, -4.8}});
}

inline std::unique_ptr<MultiClassField> sigmoid(std::vector<double> transitions, double sharpness = 40.0) {
    FieldSpec spec;
    spec.kind = FieldKind::Sigmoid1D;
    spec.k = 2;
    spec.transitions = std::move(transitions);
    spec.sharpness = sharpness;
    return make_field(spec);
}

// Class 0 inside the unit circle, class 1 outside: exp(-r^2/2) against a constant exp(-1/2).
inline FieldSpec circle_spec() {
    FieldSpec spec;
    spec.kind = FieldKind::SoftmaxRbf;
    spec.k = 2;
    ClassParams inside;
    inside.centers = {{0.0, 0.0}};
    inside.weights = {1.0};
    inside.width = 1.0;
    ClassParams outside;
    outside.centers = {{0.0, 0.0}};
    outside.weights = {0.0};
    outside.width = 1.0;
    outside.bias = std::exp(-0.5);
    spec.classes = {inside, outside};
    spec.boundary.kind = ReferenceBoundary::Kind::Circle;
    spec.boundary.center = {0.0, 0.0};
    spec.boundary.radius = 1.0;
    return spec;
}

// Two classes on the diagonals of the unit square: the label pattern has a saddle at the center.
inline FieldSpec saddle_spec() {
    FieldSpec spec;
    spec.kind = FieldKind::SoftmaxRbf;
    spec.k = 2;
    ClassParams a;
    a.centers = {{0.0, 0.0}, {1.0, 1.0}};
    a.weights = {1.0, 1.0};
    a.width = 0.45;
    ClassParams b;
    b.centers = {{1.0, 0.0}, {0.0, 1.0}};
    b.weights = {1.0, 0.9};
    b.width = 0.45;
    spec.classes = {a, b};
    return spec;
}

// Three RBFs at the corners of a triangle around the origin; the junction is
// somewhere inside, found by the grid oracle.
inline FieldSpec three_rbf_spec(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> jitter(-0.12, 0.12);
    std::uniform_real_distribution<double> weight(0.8, 1.25);
    std::uniform_real_distribution<double> width(0.45, 0.7);
    FieldSpec spec;
    spec.kind = FieldKind::SoftmaxRbf;
    spec.k = 3;
    for (int i = 0; i < 3; ++i) {
        const double a = 2.0 * M_PI * i / 3.0 + 0.5 * jitter(rng);
        ClassParams cp;
        cp.centers = {{std::cos(a) + jitter(rng), std::sin(a) + jitter(rng)}};
        cp.weights = {weight(rng)};
        cp.width = width(rng);
        spec.classes.push_back(cp);
    }
    return spec;
}

class ConstantField final : public MultiClassField {
public:
    explicit ConstantField(std::vector<double> p) : p_(std::move(p)) {}
    std::size_t class_count() const override { return p_.size(); }
    void evaluate_into(Point2, std::span<double> out) const override { std::copy(p_.begin(), p_.end(), out.begin()); }
    std::optional<Vec2> analytic_gradient(Point2, ClassId) const override { return Vec2{0.0, 0.0}; }

private:
    std::vector<double> p_;
};

// Independent root oracle: classify n + 1 equally spaced samples and bisect every label
// change down to `tol`.
struct DenseRoot {
    double position;
    ClassId left;
    ClassId right;
};

inline std::vector<DenseRoot> dense_scan_roots(const MultiClassField& field, AxisLine line, double lo, double hi,
                                               std::size_t n, double tol) {
    std::vector<DenseRoot> out;
    double prev_t = lo;
    ClassId prev = field.classify(line.at(lo));
    for (std::size_t i = 1; i <= n; ++i) {
        const double t = i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        const ClassId c = field.classify(line.at(t));
        if (c != prev) {
            double a = prev_t;
            double b = t;
            while (b - a > tol) {
                const double m = 0.5 * (a + b);
                if (field.classify(line.at(m)) == prev) {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push_back({0.5 * (a + b), prev, c});
        }
        prev = c;
        prev_t = t;
    }
    return out;
}

// Brute-force grid minimum of G over `bounds`, sampled at cell centers.
inline Point2 grid_argmin_G(const MultiClassField& field, std::array<ClassId, 3> cls, const Rect& bounds,
                            std::size_t n) {
    std::vector<double> p(field.class_count());
    double best = std::numeric_limits<double>::infinity();
    Point2 arg;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 q{bounds.x_lo + (i + 0.5) * bounds.width() / n, bounds.y_lo + (j + 0.5) * bounds.height() / n};
            field.evaluate_into(q, p);
            const double a = p[cls[0].index];
            const double b = p[cls[1].index];
            const double c = p[cls[2].index];
            const double g = (a - b) * (a - b) + (a - c) * (a - c) + (b - c) * (b - c);
            if (g < best) {
                best = g;
                arg = q;
            }
        }
    }
    return arg;
}

// Degree and crossing check written independently of check_watertight.
struct Watertightness {
    std::size_t odd = 0;
    std::size_t bad_junctions = 0;
    std::size_t crossings = 0;
    bool ok() const { return odd == 0 && bad_junctions == 0 && crossings == 0; }
};

inline double orient(Point2 a, Point2 b, Point2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

inline bool proper_or_overlap(Point2 a, Point2 b, Point2 c, Point2 d) {
    const double o1 = orient(a, b, c);
    const double o2 = orient(a, b, d);
    const double o3 = orient(c, d, a);
    const double o4 = orient(c, d, b);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
    auto within = [](Point2 p, Point2 q, Point2 r) {
        return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
               r.y <= std::max(p.y, q.y);
    };
    const bool shared = a == c || a == d || b == c || b == d;
    if (o1 == 0 && o2 == 0 && o3 == 0 && o4 == 0) {
        // collinear: overlap of positive length
        const bool horizontal = std::abs(b.x - a.x) >= std::abs(b.y - a.y);
        auto key = [&](Point2 p) { return horizontal ? p.x : p.y; };
        const double lo = std::max(std::min(key(a), key(b)), std::min(key(c), key(d)));
        const double hi = std::min(std::max(key(a), key(b)), std::max(key(c), key(d)));
        return hi > lo;
    }
    if (shared) return false;
    return (o1 == 0 && within(a, b, c)) || (o2 == 0 && within(a, b, d)) || (o3 == 0 && within(c, d, a)) ||
           (o4 == 0 && within(c, d, b));
}

inline Watertightness brute_watertight(const EdgeNetwork& net) {
    Watertightness w;
    std::vector<std::size_t> deg(net.vertices.size(), 0);
    for (const auto& s : net.segments) {
        ++deg[s.v0];
        ++deg[s.v1];
    }
    for (const auto& v : net.vertices) {
        if (v.kind == VertexKind::Junction && deg[v.id] != 3) ++w.bad_junctions;
        if (v.kind == VertexKind::EdgeRoot && deg[v.id] % 2 == 1) ++w.odd;
    }
    for (std::size_t i = 0; i < net.segments.size(); ++i) {
        const Point2 a = net.vertices[net.segments[i].v0].position;
        const Point2 b = net.vertices[net.segments[i].v1].position;
        for (std::size_t j = i + 1; j < net.segments.size(); ++j) {
            const Point2 c = net.vertices[net.segments[j].v0].position;
            const Point2 d = net.vertices[net.segments[j].v1].position;
            if (std::max(c.x, d.x) < std::min(a.x, b.x) || std::min(c.x, d.x) > std::max(a.x, b.x) ||
                std::max(c.y, d.y) < std::min(a.y, b.y) || std::min(c.y, d.y) > std::max(a.y, b.y)) {
                continue;
            }
            if (proper_or_overlap(a, b, c, d)) ++w.crossings;
        }
    }
    return w;
}

// Random axis-aligned line through the unit square.
inline AxisLine random_line(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 0.95);
    return {rng() % 2 == 0 ? Axis::X : Axis::Y, u(rng)};
}

inline Point2 random_point(std::mt19937_64& rng, const Rect& r) {
    std::uniform_real_distribution<double> ux(r.x_lo, r.x_hi);
    std::uniform_real_distribution<double> uy(r.y_lo, r.y_hi);
    return {ux(rng), uy(rng)};
}

} // namespace testsupport
