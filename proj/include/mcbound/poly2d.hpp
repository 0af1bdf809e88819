#pragma once

#include "mcbound/field.hpp"
#include "mcbound/net.hpp"
#include "mcbound/root1d.hpp"
#include "mcbound/types.hpp"

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mcbound {

enum class RectTag { Polygonisable, Ambiguous, TDM };

const char* rect_tag_name(RectTag tag);

struct RectClass {
    RectTag tag = RectTag::Ambiguous;
    std::array<ClassId, 3> classes{}; // TDM only, counter-clockwise order
};

// Edges are numbered counter-clockwise: 0 bottom, 1 right, 2 top, 3 left.
// Corner i is where edge i starts: 0 (x_lo,y_lo), 1 (x_hi,y_lo), 2 (x_hi,y_hi), 3 (x_lo,y_hi).
AxisLine edge_line(const Rect& r, int edge);
Interval1D edge_interval(const Rect& r, int edge);
Point2 corner_point(const Rect& r, int corner);

struct EdgeTransitions {
    Rect rect;
    std::array<std::vector<Root1D>, 4> edges; // roots on the closed edge, ascending along the line
    std::array<ClassId, 4> start_classes{};   // cached class just after the edge's lower end
    std::array<ClassId, 4> corners{};         // direct classification, informational
};

EdgeTransitions collect_edge_transitions(RootCache& cache, const MultiClassField& field, const Rect& rect, int vn,
                                         double epsilon, std::vector<std::string>* warnings = nullptr);

/// Class change met while walking the rectangle border counter-clockwise.
struct Transition {
    Point2 point;
    ClassId from;
    ClassId to;

    ClassPair pair() const { return ClassPair::of(from, to); }
};

/// The cyclic transition sequence: interior edge roots plus a transition at every corner
/// where the classes of the two incident edges differ. In strict mode, roots whose flanks
/// contradict each other throw InternalConsistency.
std::vector<Transition> boundary_transitions(const EdgeTransitions& et, bool strict = true);

RectClass classify_rectangle(const EdgeTransitions& et);

struct SubdivisionChoice {
    Axis axis = Axis::X;
    double position = 0.0;
};

/// The m* rule on sorted, distinct projections r within (lo, hi). Positions closer than
/// epsilon to lo or hi fall back to the midpoint.
double select_split(const std::vector<double>& r, double lo, double hi, double epsilon);

/// Splits across axis d (position is a coordinate on d) using the roots on the two edges
/// parallel to d. Uses the other axis when the rectangle is too thin along d.
SubdivisionChoice choose_subdivision(const EdgeTransitions& et, Axis d, double epsilon);

struct RectVerification {
    bool verified = false;
    std::size_t nodes = 0;
};

/// Builds the vn-level subdivision tree below rect (axis = its next split direction).
RectVerification verify_rectangle(RootCache& cache, const MultiClassField& field, const Rect& rect, Axis axis,
                                  const RectClass& cls, int vn, double epsilon);

struct GeometricDecision {
    bool subdivide = false;
    Axis axis = Axis::X;
    double position = 0.0;      // split coordinate on `axis`
    double distance = 0.0;      // tangent intersection to the segment's line
    double length = 0.0;
    bool zero_gradient = false;
};

GeometricDecision apply_geometric_criterion(const MultiClassField& field, const BoundarySegment& seg, double delta);

/// Throws InternalConsistency when the transitions cannot be paired for the class.
std::vector<BoundarySegment> connect_edges(const EdgeTransitions& et, const RectClass& cls,
                                           std::optional<Point2> junction = std::nullopt);

/// Stack pairing along the cyclic order; unpaired transitions are joined to the center.
std::vector<BoundarySegment> connect_best_effort(const EdgeTransitions& et, std::vector<Point2>* junctions = nullptr);

struct PolyTraceEvent {
    enum class Stack { Verification, Normal };

    Stack stack = Stack::Verification; // the stack this rectangle was popped from
    std::size_t verification_size = 0; // sizes before the pop
    std::size_t normal_size = 0;
    Rect rect;
    RectTag tag = RectTag::Ambiguous;
    std::string action;
};

using PolyTraceSink = std::function<void(const PolyTraceEvent&)>;

struct PolygoniseParams {
    int vn = 2;
    double delta = std::numeric_limits<double>::infinity(); // infinity disables the criterion
    double epsilon = 1e-12;
    int junction_max_iterations = 50;
    int junction_max_evaluations = 500;
    PolyTraceSink trace;
};

struct PolyLeaf {
    Rect rect;
    RectTag tag = RectTag::Ambiguous;
    bool epsilon_limit = false;
};

struct PolygoniseResult {
    EdgeNetwork network;
    std::vector<PolyLeaf> leaves;
    std::size_t rectangles_processed = 0;
    std::size_t verification_failures = 0;
    std::size_t geometric_splits = 0;
    std::size_t junctions = 0;
    std::size_t junction_fallbacks = 0;
};

PolygoniseResult polygonise(const MultiClassField& field, const Rect& root, const PolygoniseParams& params);

} // namespace mcbound
