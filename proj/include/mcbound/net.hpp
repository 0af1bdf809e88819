#pragma once

#include "mcbound/types.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcbound {

/// Straight piece of the boundary between two classes.
struct BoundarySegment {
    Point2 p0;
    Point2 p1;
    ClassPair pair;
};

enum class VertexKind { EdgeRoot, Junction, BorderTerminal };

const char* vertex_kind_name(VertexKind kind);

struct NetworkVertex {
    std::size_t id = 0;
    Point2 position;
    VertexKind kind = VertexKind::EdgeRoot;
};

struct NetworkSegment {
    std::size_t v0 = 0;
    std::size_t v1 = 0;
    ClassPair pair;
};

/// Final boundary network. Vertex ids equal their index; vertices are sorted by (x, y)
/// and segments by (v0, v1) so equal networks serialise identically.
struct EdgeNetwork {
    Rect bounds;
    std::vector<NetworkVertex> vertices;
    std::vector<NetworkSegment> segments;
    std::vector<std::string> warnings;

    std::vector<std::size_t> degrees() const;
    BoundarySegment segment_geometry(std::size_t i) const;
};

/// Deduplicates endpoints by exact coordinates. Points listed in `junctions` become
/// junction vertices; other endpoints on the bounds border become border terminals.
/// Zero-length and duplicate segments are dropped, the former with a warning.
EdgeNetwork build_network(const std::vector<BoundarySegment>& segments, const Rect& bounds,
                          const std::vector<Point2>& junctions = {});

struct WatertightReport {
    std::vector<std::size_t> odd_vertices;                    // interior, non-junction
    std::vector<std::size_t> bad_junctions;                   // degree != 3 or malformed pairs
    std::vector<std::pair<std::size_t, std::size_t>> crossings; // segment index pairs

    bool watertight() const { return odd_vertices.empty() && bad_junctions.empty() && crossings.empty(); }
    std::string to_json() const;
};

WatertightReport check_watertight(const EdgeNetwork& net);

/// True if the closed segments intersect anywhere other than a shared endpoint.
bool segments_cross(Point2 a0, Point2 a1, Point2 b0, Point2 b1);
double point_segment_distance(Point2 p, Point2 a, Point2 b);

std::string to_json(const EdgeNetwork& net);
/// Throws ParseError naming the offending path.
EdgeNetwork network_from_json(std::string_view text);

struct SvgStyle {
    double width_px = 800.0;
    double stroke_width = 1.5;
    bool mark_junctions = true;
};

std::string to_svg(const EdgeNetwork& net, const SvgStyle& style = {});

} // namespace mcbound
