#pragma once

#include "mcbound/field.hpp"
#include "mcbound/types.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace mcbound {

/// Axis-aligned line: `axis` is the varying coordinate, `fixed` the other one.
struct AxisLine {
    Axis axis = Axis::X;
    double fixed = 0.0;

    Point2 at(double t) const { return axis == Axis::X ? Point2{t, fixed} : Point2{fixed, t}; }
    friend bool operator==(const AxisLine&, const AxisLine&) = default;
};

struct Interval1D {
    double lo = 0.0;
    double hi = 1.0;

    double width() const { return hi - lo; }
    double mid() const { return lo + 0.5 * (hi - lo); }
    bool valid() const { return std::isfinite(lo) && std::isfinite(hi) && lo < hi; }
};

struct IntervalClass {
    enum class Tag { Consistent, PotentialRoot, Ambiguous };

    Tag tag = Tag::Ambiguous;
    ClassId a; // Consistent: the class; PotentialRoot: class at lo
    ClassId b; // PotentialRoot: class at hi

    static IntervalClass consistent(ClassId c) { return {Tag::Consistent, c, c}; }
    static IntervalClass potential_root(ClassId lo_class, ClassId hi_class) {
        return {Tag::PotentialRoot, lo_class, hi_class};
    }
    static IntervalClass ambiguous() { return {}; }

    friend bool operator==(const IntervalClass&, const IntervalClass&) = default;
};

const char* interval_class_name(IntervalClass::Tag tag);

/// A confirmed class transition on a line.
struct Root1D {
    double position = 0.0;
    ClassId left_class;
    ClassId right_class;
    AxisLine line;

    Point2 point() const { return line.at(position); }
};

/// Scalar function on a line with its derivative; g = f_a - f_b in the root finder.
struct LineFunction {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
};

LineFunction pair_difference(const MultiClassField& field, AxisLine line, ClassId a, ClassId b);

struct RootLikelihood {
    enum class Tag { DefiniteWithin, PossibleNear, Unlikely };

    Tag tag = Tag::Unlikely;
    std::optional<double> x1_star;
    std::optional<double> x2_star;
};

/// Top-two bracketing: Consistent if the leading classes agree, PotentialRoot if the
/// top two swap exactly, Ambiguous otherwise.
IntervalClass classify_interval(const MultiClassField& field, AxisLine line, Interval1D iv);

/// Tangent projections x* = x - g(x)/g'(x) from both ends, judged against [lo, hi]
/// and the window widened by the interval width on each side.
RootLikelihood gradient_localisation(const LineFunction& g, Interval1D iv);
RootLikelihood gradient_localisation(const MultiClassField& field, AxisLine line, Interval1D iv, ClassId a, ClassId b);

/// Newton from iv.lo, safeguarded by bisection on the sign-change bracket.
/// Throws RefinementFailure when there is no sign change and Newton leaves the interval.
double refine_root(const LineFunction& g, Interval1D iv, double epsilon);
double refine_root(const MultiClassField& field, AxisLine line, Interval1D iv, ClassId a, ClassId b, double epsilon);

struct IntervalVerification {
    bool verified = false;
    std::size_t nodes = 0;                // always 2^(Vn+1) - 2
    std::optional<Interval1D> root_leaf;  // the single PotentialRoot leaf, when verified
};

/// Bisects `depth` levels below iv and checks the subtree against `cls`.
IntervalVerification verify_interval(const MultiClassField& field, AxisLine line, Interval1D iv, IntervalClass cls,
                                     int depth);

struct RootTraceEvent {
    enum class Queue { Verification, Normal };

    Queue queue = Queue::Normal;
    std::size_t verification_size = 0; // sizes before the pop
    std::size_t normal_size = 0;
    Interval1D interval;
    std::string action;
};

struct RootScan {
    std::vector<Root1D> roots;
    std::vector<std::string> warnings;
};

using RootTraceSink = std::function<void(const RootTraceEvent&)>;

/// Breadth-first multi-class root finder over iv. Returns every transition sorted by
/// position; roots closer than epsilon merge.
RootScan find_roots(const MultiClassField& field, AxisLine line, Interval1D iv, int depth, double epsilon,
                    const RootTraceSink& trace = {});

/// Roots on one queried interval. Flanks come from the line's cached class function, so
/// consecutive roots always agree on the class between them.
struct LineQuery {
    std::vector<Root1D> roots;  // lo <= position <= hi, ascending
    ClassId start_class;        // class just after lo
};

/// Per-line store of confirmed roots and covered pieces, shared by every rectangle edge
/// on the same line so neighbours see bit-identical roots and classes. Each piece records
/// the class at its start; classes elsewhere follow from the roots. Where two separately
/// searched pieces meet with different classes, a root is placed exactly at the seam.
/// Queries are serialised by an internal mutex.
class RootCache {
public:
    LineQuery query(const MultiClassField& field, AxisLine line, Interval1D iv, int depth, double epsilon,
                    std::vector<std::string>* warnings = nullptr);

    std::size_t line_count() const;
    /// Number of find_roots invocations so far.
    std::size_t finder_runs() const;

private:
    struct Piece {
        Interval1D span;
        ClassId base; // class just after span.lo, before any root in the piece
    };

    struct LineEntry {
        std::vector<Root1D> roots;  // sorted by position
        std::vector<Piece> pieces;  // sorted, disjoint, possibly touching
    };

    static const Piece* piece_after(const LineEntry& entry, double t);
    static const Piece* piece_before(const LineEntry& entry, double t);
    static std::optional<ClassId> class_after(const LineEntry& entry, double t);
    static std::optional<ClassId> class_before(const LineEntry& entry, double t);
    static void insert_exact(LineEntry& entry, const Root1D& root);
    void fill_gap(LineEntry& entry, const MultiClassField& field, AxisLine line, Interval1D gap, int depth,
                  double epsilon, std::vector<std::string>* warnings);

    mutable std::mutex mutex_;
    std::map<std::pair<int, double>, LineEntry> lines_;
    std::size_t finder_runs_ = 0;
};

} // namespace mcbound
