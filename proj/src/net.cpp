#include "mcbound/net.hpp"

#include "mcbound/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

namespace mcbound {

const char* vertex_kind_name(VertexKind kind) {
    switch (kind) {
    case VertexKind::EdgeRoot: return "edge_root";
    case VertexKind::Junction: return "junction";
    case VertexKind::BorderTerminal: return "border";
    }
    return "unknown";
}

std::vector<std::size_t> EdgeNetwork::degrees() const {
    std::vector<std::size_t> deg(vertices.size(), 0);
    for (const auto& s : segments) {
        ++deg[s.v0];
        ++deg[s.v1];
    }
    return deg;
}

BoundarySegment EdgeNetwork::segment_geometry(std::size_t i) const {
    const auto& s = segments[i];
    return {vertices[s.v0].position, vertices[s.v1].position, s.pair};
}

namespace {

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool point_less(Point2 a, Point2 b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); }

// Axis-aligned segments sharing a line and a class pair are summed mod 2 and split at every
// endpoint lying on them. Overlaps only arise when both sides of a grid line trace the same
// boundary; cancelling them keeps every vertex degree parity intact.
std::vector<BoundarySegment> resolve_collinear(const std::vector<BoundarySegment>& segments,
                                               std::vector<std::string>& warnings) {
    using Key = std::tuple<int, double, ClassPair>;
    std::map<Key, std::vector<std::pair<double, double>>> groups;
    std::vector<BoundarySegment> out;
    for (const auto& s : segments) {
        if (s.p0 == s.p1) {
            out.push_back(s);
        } else if (s.p0.x == s.p1.x) {
            groups[{1, s.p0.x, s.pair}].push_back(std::minmax(s.p0.y, s.p1.y));
        } else if (s.p0.y == s.p1.y) {
            groups[{0, s.p0.y, s.pair}].push_back(std::minmax(s.p0.x, s.p1.x));
        } else {
            out.push_back(s);
        }
    }
    if (groups.empty()) return out;

    std::map<std::pair<int, double>, std::vector<double>> on_line;
    for (const auto& s : segments) {
        for (Point2 p : {s.p0, s.p1}) {
            on_line[{0, p.y}].push_back(p.x);
            on_line[{1, p.x}].push_back(p.y);
        }
    }
    for (auto& [line, ts] : on_line) {
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    }

    for (const auto& [key, spans] : groups) {
        const auto& [axis, c, pair] = key;
        const auto& ts = on_line.at({axis, c});
        std::vector<int> cover(ts.size(), 0);
        for (const auto& [lo, hi] : spans) {
            const auto i = std::lower_bound(ts.begin(), ts.end(), lo) - ts.begin();
            const auto j = std::lower_bound(ts.begin(), ts.end(), hi) - ts.begin();
            for (auto k = i; k < j; ++k) ++cover[k];
        }
        bool cancelled = false;
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
            if (cover[k] > 1) cancelled = true;
            if (cover[k] % 2 == 0) continue;
            const Point2 a = axis == 1 ? Point2{c, ts[k]} : Point2{ts[k], c};
            const Point2 b = axis == 1 ? Point2{c, ts[k + 1]} : Point2{ts[k + 1], c};
            out.push_back({a, b, pair});
        }
        if (cancelled) {
            warnings.push_back(std::string("overlapping boundary traced from both sides of ") +
                               (axis == 1 ? "x = " : "y = ") + number(c) + " for pair " +
                               std::to_string(pair.lo.index) + "/" + std::to_string(pair.hi.index));
        }
    }
    return out;
}

int orientation(Point2 a, Point2 b, Point2 c) {
    const double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
}

bool on_segment(Point2 a, Point2 b, Point2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

bool closed_intersect(Point2 a0, Point2 a1, Point2 b0, Point2 b1) {
    const int o1 = orientation(a0, a1, b0);
    const int o2 = orientation(a0, a1, b1);
    const int o3 = orientation(b0, b1, a0);
    const int o4 = orientation(b0, b1, a1);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a0, a1, b0)) return true;
    if (o2 == 0 && on_segment(a0, a1, b1)) return true;
    if (o3 == 0 && on_segment(b0, b1, a0)) return true;
    if (o4 == 0 && on_segment(b0, b1, a1)) return true;
    return false;
}

} // namespace

bool segments_cross(Point2 a0, Point2 a1, Point2 b0, Point2 b1) {
    const bool share = a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1;
    if (!share) return closed_intersect(a0, a1, b0, b1);
    // sharing an endpoint: only a collinear overlap counts
    Point2 shared = (a0 == b0 || a0 == b1) ? a0 : a1;
    Point2 a_other = shared == a0 ? a1 : a0;
    Point2 b_other = shared == b0 ? b1 : b0;
    if (a_other == b_other) return true; // duplicate segment
    if (orientation(shared, a_other, b_other) != 0) return false;
    return dot(a_other - shared, b_other - shared) > 0.0;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return norm(p - a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

EdgeNetwork build_network(const std::vector<BoundarySegment>& segments, const Rect& bounds,
                          const std::vector<Point2>& junctions) {
    EdgeNetwork net;
    net.bounds = bounds;
    const std::vector<BoundarySegment> resolved = resolve_collinear(segments, net.warnings);

    std::vector<Point2> points;
    for (const auto& s : resolved) {
        points.push_back(s.p0);
        points.push_back(s.p1);
    }
    std::sort(points.begin(), points.end(), point_less);
    points.erase(std::unique(points.begin(), points.end()), points.end());

    std::set<std::pair<double, double>> junction_set;
    for (Point2 j : junctions) junction_set.insert({j.x, j.y});

    std::map<std::pair<double, double>, std::size_t> ids;
    for (Point2 p : points) {
        NetworkVertex v;
        v.id = net.vertices.size();
        v.position = p;
        if (junction_set.count({p.x, p.y})) {
            v.kind = VertexKind::Junction;
        } else if (bounds.on_border(p)) {
            v.kind = VertexKind::BorderTerminal;
        }
        ids[{p.x, p.y}] = v.id;
        net.vertices.push_back(v);
    }

    std::set<std::tuple<std::size_t, std::size_t, std::uint32_t, std::uint32_t>> seen;
    for (const auto& s : resolved) {
        if (s.p0 == s.p1) {
            net.warnings.push_back("dropped zero-length segment at (" + number(s.p0.x) + ", " + number(s.p0.y) + ")");
            continue;
        }
        std::size_t a = ids.at({s.p0.x, s.p0.y});
        std::size_t b = ids.at({s.p1.x, s.p1.y});
        if (a > b) std::swap(a, b);
        if (!seen.insert({a, b, s.pair.lo.index, s.pair.hi.index}).second) continue;
        net.segments.push_back({a, b, s.pair});
    }
    std::sort(net.segments.begin(), net.segments.end(), [](const NetworkSegment& l, const NetworkSegment& r) {
        return std::tie(l.v0, l.v1, l.pair) < std::tie(r.v0, r.v1, r.pair);
    });
    return net;
}

WatertightReport check_watertight(const EdgeNetwork& net) {
    WatertightReport report;
    const auto deg = net.degrees();

    std::vector<std::vector<ClassPair>> incident(net.vertices.size());
    for (const auto& s : net.segments) {
        incident[s.v0].push_back(s.pair);
        incident[s.v1].push_back(s.pair);
    }

    for (const auto& v : net.vertices) {
        if (v.kind == VertexKind::Junction) {
            bool ok = deg[v.id] == 3;
            if (ok) {
                std::set<ClassPair> pairs(incident[v.id].begin(), incident[v.id].end());
                std::set<ClassId> classes;
                for (const auto& p : pairs) {
                    classes.insert(p.lo);
                    classes.insert(p.hi);
                }
                ok = pairs.size() == 3 && classes.size() == 3;
            }
            if (!ok) report.bad_junctions.push_back(v.id);
        } else if (v.kind == VertexKind::EdgeRoot && deg[v.id] % 2 == 1) {
            report.odd_vertices.push_back(v.id);
        }
    }

    // brute force over all pairs, with a bounding-box reject
    const std::size_t n = net.segments.size();
    std::vector<Rect> boxes(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto g = net.segment_geometry(i);
        boxes[i] = {std::min(g.p0.x, g.p1.x), std::min(g.p0.y, g.p1.y), std::max(g.p0.x, g.p1.x),
                    std::max(g.p0.y, g.p1.y)};
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = net.segment_geometry(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (boxes[j].x_lo > boxes[i].x_hi || boxes[j].x_hi < boxes[i].x_lo || boxes[j].y_lo > boxes[i].y_hi ||
                boxes[j].y_hi < boxes[i].y_lo) {
                continue;
            }
            const auto b = net.segment_geometry(j);
            if (segments_cross(a.p0, a.p1, b.p0, b.p1)) report.crossings.emplace_back(i, j);
        }
    }
    return report;
}

std::string WatertightReport::to_json() const {
    nlohmann::json j;
    j["watertight"] = watertight();
    j["odd_vertices"] = odd_vertices;
    j["bad_junctions"] = bad_junctions;
    nlohmann::json c = nlohmann::json::array();
    for (const auto& [a, b] : crossings) c.push_back({a, b});
    j["crossings"] = c;
    return j.dump();
}

std::string to_json(const EdgeNetwork& net) {
    std::string out = "{\n";
    out += "  \"bounds\": [" + number(net.bounds.x_lo) + ", " + number(net.bounds.y_lo) + ", " +
           number(net.bounds.x_hi) + ", " + number(net.bounds.y_hi) + "],\n";
    out += "  \"segments\": [";
    for (std::size_t i = 0; i < net.segments.size(); ++i) {
        const auto& s = net.segments[i];
        out += i == 0 ? "\n" : ",\n";
        out += "    {\"class_a\": " + std::to_string(s.pair.lo.index) + ", \"class_b\": " +
               std::to_string(s.pair.hi.index) + ", \"v0\": " + std::to_string(s.v0) + ", \"v1\": " +
               std::to_string(s.v1) + "}";
    }
    out += net.segments.empty() ? "],\n" : "\n  ],\n";
    out += "  \"vertices\": [";
    for (std::size_t i = 0; i < net.vertices.size(); ++i) {
        const auto& v = net.vertices[i];
        out += i == 0 ? "\n" : ",\n";
        out += "    {\"id\": " + std::to_string(v.id) + ", \"kind\": \"" + vertex_kind_name(v.kind) + "\", \"x\": " +
               number(v.position.x) + ", \"y\": " + number(v.position.y) + "}";
    }
    out += net.vertices.empty() ? "],\n" : "\n  ],\n";
    out += "  \"warnings\": [";
    for (std::size_t i = 0; i < net.warnings.size(); ++i) {
        out += i == 0 ? "\n    " : ",\n    ";
        out += nlohmann::json(net.warnings[i]).dump();
    }
    out += net.warnings.empty() ? "]\n" : "\n  ]\n";
    out += "}\n";
    return out;
}

EdgeNetwork network_from_json(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("/: invalid JSON: ") + e.what());
    }
    auto fail = [](const std::string& path, const std::string& what) { throw ParseError(path + ": " + what); };
    auto num = [&](const json& j, const std::string& path) {
        if (!j.is_number()) fail(path, "expected a number");
        return j.get<double>();
    };
    auto index = [&](const json& j, const std::string& path) {
        if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
        return j.get<std::size_t>();
    };
    if (!doc.is_object()) fail("/", "expected an object");

    EdgeNetwork net;
    if (!doc.contains("bounds") || !doc["bounds"].is_array() || doc["bounds"].size() != 4) {
        fail("/bounds", "expected [x_lo, y_lo, x_hi, y_hi]");
    }
    net.bounds = {num(doc["bounds"][0], "/bounds/0"), num(doc["bounds"][1], "/bounds/1"),
                  num(doc["bounds"][2], "/bounds/2"), num(doc["bounds"][3], "/bounds/3")};
    if (!net.bounds.valid()) fail("/bounds", "degenerate rectangle");

    if (!doc.contains("vertices") || !doc["vertices"].is_array()) fail("/vertices", "expected an array");
    for (std::size_t i = 0; i < doc["vertices"].size(); ++i) {
        const std::string path = "/vertices/" + std::to_string(i);
        const json& v = doc["vertices"][i];
        if (!v.is_object()) fail(path, "expected an object");
        NetworkVertex nv;
        nv.id = index(v.value("id", json()), path + "/id");
        if (nv.id != i) fail(path + "/id", "ids must equal their position");
        nv.position = {num(v.value("x", json()), path + "/x"), num(v.value("y", json()), path + "/y")};
        const std::string kind = v.value("kind", std::string());
        if (kind == "edge_root") {
            nv.kind = VertexKind::EdgeRoot;
        } else if (kind == "junction") {
            nv.kind = VertexKind::Junction;
        } else if (kind == "border") {
            nv.kind = VertexKind::BorderTerminal;
        } else {
            fail(path + "/kind", "unknown vertex kind '" + kind + "'");
        }
        net.vertices.push_back(nv);
    }

    if (!doc.contains("segments") || !doc["segments"].is_array()) fail("/segments", "expected an array");
    for (std::size_t i = 0; i < doc["segments"].size(); ++i) {
        const std::string path = "/segments/" + std::to_string(i);
        const json& s = doc["segments"][i];
        if (!s.is_object()) fail(path, "expected an object");
        NetworkSegment ns;
        ns.v0 = index(s.value("v0", json()), path + "/v0");
        ns.v1 = index(s.value("v1", json()), path + "/v1");
        if (ns.v0 >= net.vertices.size()) fail(path + "/v0", "unknown vertex");
        if (ns.v1 >= net.vertices.size()) fail(path + "/v1", "unknown vertex");
        if (ns.v0 == ns.v1) fail(path, "segment endpoints must differ");
        const auto a = index(s.value("class_a", json()), path + "/class_a");
        const auto b = index(s.value("class_b", json()), path + "/class_b");
        if (a == b) fail(path, "class pair must be distinct");
        ns.pair = ClassPair::of(ClassId{static_cast<std::uint32_t>(a)}, ClassId{static_cast<std::uint32_t>(b)});
        net.segments.push_back(ns);
    }

    if (doc.contains("warnings")) {
        if (!doc["warnings"].is_array()) fail("/warnings", "expected an array of strings");
        for (std::size_t i = 0; i < doc["warnings"].size(); ++i) {
            if (!doc["warnings"][i].is_string()) fail("/warnings/" + std::to_string(i), "expected a string");
            net.warnings.push_back(doc["warnings"][i].get<std::string>());
        }
    }
    return net;
}

namespace {

std::string pair_colour(ClassPair pair) {
    // golden-angle hue walk keyed by the pair
    const double key = static_cast<double>(pair.lo.index * 31u + pair.hi.index * 17u + 7u);
    const double hue = std::fmod(key * 137.50776405, 360.0);
    char buf[48];
    std::snprintf(buf, sizeof buf, "hsl(%.1f,70%%,40%%)", hue);
    return buf;
}

// Splits the segments of one class pair into maximal chains through degree-2 vertices.
std::vector<std::vector<std::size_t>> chains_for_pair(const EdgeNetwork& net, const std::vector<std::size_t>& segs) {
    std::map<std::size_t, std::vector<std::size_t>> adj; // vertex -> local segment indices
    for (std::size_t i = 0; i < segs.size(); ++i) {
        adj[net.segments[segs[i]].v0].push_back(i);
        adj[net.segments[segs[i]].v1].push_back(i);
    }
    std::vector<bool> used(segs.size(), false);
    std::vector<std::vector<std::size_t>> chains;

    auto walk = [&](std::size_t start_vertex, std::size_t first) {
        std::vector<std::size_t> chain{start_vertex};
        std::size_t v = start_vertex;
        std::size_t s = first;
        while (true) {
            used[s] = true;
            const auto& seg = net.segments[segs[s]];
            v = seg.v0 == v ? seg.v1 : seg.v0;
            chain.push_back(v);
            const auto& next = adj[v];
            if (next.size() != 2) break;
            const std::size_t n = next[0] == s ? next[1] : next[0];
            if (used[n]) break;
            s = n;
        }
        chains.push_back(std::move(chain));
    };

    for (const auto& [v, list] : adj) {
        if (list.size() == 2) continue;
        for (std::size_t s : list) {
            if (!used[s]) walk(v, s);
        }
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (!used[i]) walk(net.segments[segs[i]].v0, i); // closed loops
    }
    return chains;
}

} // namespace

std::string to_svg(const EdgeNetwork& net, const SvgStyle& style) {
    const Rect& b = net.bounds;
    const double scale = style.width_px / b.width();
    const double height_px = b.height() * scale;
    auto px = [&](Point2 p) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "%.4f %.4f", (p.x - b.x_lo) * scale, (b.y_hi - p.y) * scale);
        return std::string(buf);
    };

    char head[320];
    std::snprintf(head, sizeof head,
                  "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%.4f\" height=\"%.4f\" "
                  "viewBox=\"0 0 %.4f %.4f\">\n",
                  style.width_px, height_px, style.width_px, height_px);
    std::string out = head;
    out += "  <rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"#999\"/>\n";

    std::map<ClassPair, std::vector<std::size_t>> by_pair;
    for (std::size_t i = 0; i < net.segments.size(); ++i) by_pair[net.segments[i].pair].push_back(i);

    for (const auto& [pair, segs] : by_pair) {
        const std::string colour = pair_colour(pair);
        for (const auto& chain : chains_for_pair(net, segs)) {
            std::string d = "M " + px(net.vertices[chain[0]].position);
            for (std::size_t i = 1; i < chain.size(); ++i) d += " L " + px(net.vertices[chain[i]].position);
            out += "  <path data-pair=\"" + std::to_string(pair.lo.index) + "-" + std::to_string(pair.hi.index) +
                   "\" d=\"" + d + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"" +
                   std::to_string(style.stroke_width) + "\"/>\n";
        }
    }
    if (style.mark_junctions) {
        for (const auto& v : net.vertices) {
            if (v.kind != VertexKind::Junction) continue;
            const std::string p = px(v.position);
            const auto space = p.find(' ');
            out += "  <circle cx=\"" + p.substr(0, space) + "\" cy=\"" + p.substr(space + 1) +
                   "\" r=\"2.5\" fill=\"black\"/>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

} // namespace mcbound
