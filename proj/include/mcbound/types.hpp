#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>

namespace mcbound {

/// A point (or vector) in the plane.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
};

using Vec2 = Point2;

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Class index. Zero-based: class C_1 of the usual 1-based notation is ClassId{0}.
struct ClassId {
    std::uint32_t index = 0;

    friend auto operator<=>(const ClassId&, const ClassId&) = default;
};

/// Unordered class pair, stored with lo < hi.
struct ClassPair {
    ClassId lo;
    ClassId hi;

    static ClassPair of(ClassId a, ClassId b) { return a < b ? ClassPair{a, b} : ClassPair{b, a}; }
    bool contains(ClassId c) const { return c == lo || c == hi; }
    ClassId other(ClassId c) const { return c == lo ? hi : lo; }

    friend auto operator<=>(const ClassPair&, const ClassPair&) = default;
};

enum class Axis { X, Y };

inline Axis flip(Axis a) { return a == Axis::X ? Axis::Y : Axis::X; }
inline const char* axis_name(Axis a) { return a == Axis::X ? "x" : "y"; }
inline double along(Point2 p, Axis a) { return a == Axis::X ? p.x : p.y; }

/// Axis-aligned rectangle, x_lo < x_hi and y_lo < y_hi.
struct Rect {
    double x_lo = 0.0;
    double y_lo = 0.0;
    double x_hi = 1.0;
    double y_hi = 1.0;

    double width() const { return x_hi - x_lo; }
    double height() const { return y_hi - y_lo; }
    double lo(Axis a) const { return a == Axis::X ? x_lo : y_lo; }
    double hi(Axis a) const { return a == Axis::X ? x_hi : y_hi; }
    double extent(Axis a) const { return hi(a) - lo(a); }
    double shorter_side() const { return std::min(width(), height()); }
    Point2 center() const { return {0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi)}; }
    bool valid() const {
        return std::isfinite(x_lo) && std::isfinite(x_hi) && std::isfinite(y_lo) &&
               std::isfinite(y_hi) && x_lo < x_hi && y_lo < y_hi;
    }
    bool contains(Point2 p) const { return p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi; }
    bool on_border(Point2 p) const {
        return contains(p) && (p.x == x_lo || p.x == x_hi || p.y == y_lo || p.y == y_hi);
    }
    Point2 clamp(Point2 p) const {
        return {std::min(std::max(p.x, x_lo), x_hi), std::min(std::max(p.y, y_lo), y_hi)};
    }

    /// Splits at `position` on axis `a` into (lower, upper).
    std::pair<Rect, Rect> split(Axis a, double position) const {
        Rect lower = *this;
        Rect upper = *this;
        if (a == Axis::X) {
            lower.x_hi = position;
            upper.x_lo = position;
        } else {
            lower.y_hi = position;
            upper.y_lo = position;
        }
        return {lower, upper};
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

} // namespace mcbound
