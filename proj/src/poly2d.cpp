#include "mcbound/poly2d.hpp"

#include "mcbound/errors.hpp"
#include "mcbound/junction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace mcbound {

const char* rect_tag_name(RectTag tag) {
    switch (tag) {
    case RectTag::Polygonisable: return "polygonisable";
    case RectTag::Ambiguous: return "ambiguous";
    case RectTag::TDM: return "tdm";
    }
    return "unknown";
}

AxisLine edge_line(const Rect& r, int edge) {
    switch (edge) {
    case 0: return {Axis::X, r.y_lo};
    case 1: return {Axis::Y, r.x_hi};
    case 2: return {Axis::X, r.y_hi};
    default: return {Axis::Y, r.x_lo};
    }
}

Interval1D edge_interval(const Rect& r, int edge) {
    return edge % 2 == 0 ? Interval1D{r.x_lo, r.x_hi} : Interval1D{r.y_lo, r.y_hi};
}

Point2 corner_point(const Rect& r, int corner) {
    switch (corner) {
    case 0: return {r.x_lo, r.y_lo};
    case 1: return {r.x_hi, r.y_lo};
    case 2: return {r.x_hi, r.y_hi};
    default: return {r.x_lo, r.y_hi};
    }
}

namespace {

std::string rect_text(const Rect& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "[%.17g, %.17g] x [%.17g, %.17g]", r.x_lo, r.x_hi, r.y_lo, r.y_hi);
    return buf;
}

// Walk direction: bottom and right run with their line, top and left against it.
bool forward(int edge) { return edge == 0 || edge == 1; }

} // namespace

EdgeTransitions collect_edge_transitions(RootCache& cache, const MultiClassField& field, const Rect& rect, int vn,
                                         double epsilon, std::vector<std::string>* warnings) {
    if (!rect.valid()) throw InvalidInput("rectangle must satisfy x_lo < x_hi and y_lo < y_hi");
    EdgeTransitions et;
    et.rect = rect;
    for (int e = 0; e < 4; ++e) {
        const AxisLine line = edge_line(rect, e);
        const Interval1D iv = edge_interval(rect, e);
        LineQuery q = cache.query(field, line, iv, vn, epsilon, warnings);
        et.edges[e] = std::move(q.roots);
        et.start_classes[e] = q.start_class;
        et.corners[e] = field.classify(corner_point(rect, e));
    }
    return et;
}

std::vector<Transition> boundary_transitions(const EdgeTransitions& et, bool strict) {
    struct EdgeWalk {
        std::vector<Transition> interior;
        ClassId start;
        ClassId end;
    };
    std::array<EdgeWalk, 4> walks;

    for (int e = 0; e < 4; ++e) {
        const Interval1D iv = edge_interval(et.rect, e);
        EdgeWalk& w = walks[e];
        for (const Root1D& r : et.edges[e]) {
            if (r.position <= iv.lo || r.position >= iv.hi) continue;
            if (forward(e)) {
                w.interior.push_back({r.point(), r.left_class, r.right_class});
            } else {
                w.interior.push_back({r.point(), r.right_class, r.left_class});
            }
        }
        if (!forward(e)) std::reverse(w.interior.begin(), w.interior.end());
        for (std::size_t i = 0; i + 1 < w.interior.size(); ++i) {
            if (strict && w.interior[i].to != w.interior[i + 1].from) {
                throw InternalConsistency("edge " + std::to_string(e) + " of " + rect_text(et.rect) +
                                          ": neighbouring roots disagree on the class between them");
            }
        }
        w.start = w.interior.empty() ? et.start_classes[e] : w.interior.front().from;
        w.end = w.interior.empty() ? et.start_classes[e] : w.interior.back().to;
    }

    std::vector<Transition> out;
    for (int e = 0; e < 4; ++e) {
        const EdgeWalk& w = walks[e];
        out.insert(out.end(), w.interior.begin(), w.interior.end());
        const int next = (e + 1) % 4;
        const EdgeWalk& n = walks[next];
        if (w.end != n.start) out.push_back({corner_point(et.rect, next), w.end, n.start});
    }
    return out;
}

namespace {

// For four transitions, a pairing option i joins T[i]-T[i+1] and T[i+2]-T[i+3]; it is
// valid when both chords cut off a single run.
bool pairing_valid(const std::vector<Transition>& t, int option) {
    const auto& a = t[option];
    const auto& b = t[option + 1];
    const auto& c = t[(option + 2) % 4];
    const auto& d = t[(option + 3) % 4];
    return a.from == b.to && c.from == d.to;
}

} // namespace

RectClass classify_rectangle(const EdgeTransitions& et) {
    RectClass out;
    for (int e = 0; e < 4; ++e) {
        const Interval1D iv = edge_interval(et.rect, e);
        const auto interior = std::count_if(et.edges[e].begin(), et.edges[e].end(), [&](const Root1D& r) {
            return r.position > iv.lo && r.position < iv.hi;
        });
        if (interior >= 2) return out;
    }

    const auto t = boundary_transitions(et, true);
    switch (t.size()) {
    case 0: out.tag = RectTag::Polygonisable; break;
    case 2:
        if (t[0].pair() != t[1].pair()) throw InternalConsistency("two transitions with different class pairs");
        out.tag = RectTag::Polygonisable;
        break;
    case 3:
        out.tag = RectTag::TDM;
        out.classes = {t[0].from, t[1].from, t[2].from};
        break;
    case 4:
        if (pairing_valid(t, 0) != pairing_valid(t, 1)) out.tag = RectTag::Polygonisable;
        break;
    case 1: throw InternalConsistency("a single transition cannot close around the rectangle");
    default: break;
    }
    return out;
}

double select_split(const std::vector<double>& r, double lo, double hi, double epsilon) {
    const double mid = lo + 0.5 * (hi - lo);
    if (r.size() < 2) return mid;
    const std::size_t n = r.size() - 1; // |M|
    const std::size_t h = n / 2;
    std::size_t pick = h;
    if (n % 2 == 0) {
        // 1-based candidates h and h+1 are 0-based h-1 and h; ties go to the lower
        pick = (r[h + 1] - r[h]) > (r[h] - r[h - 1]) ? h : h - 1;
    }
    const double m = 0.5 * (r[pick] + r[pick + 1]);
    if (!(m - lo >= epsilon && hi - m >= epsilon)) return mid;
    return m;
}

SubdivisionChoice choose_subdivision(const EdgeTransitions& et, Axis d, double epsilon) {
    if (et.rect.extent(d) < 2.0 * epsilon && et.rect.extent(flip(d)) >= 2.0 * epsilon) d = flip(d);
    const int e0 = d == Axis::X ? 0 : 1;
    std::vector<double> r;
    for (int e : {e0, e0 + 2}) {
        for (const Root1D& root : et.edges[e]) r.push_back(root.position);
    }
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    return {d, select_split(r, et.rect.lo(d), et.rect.hi(d), epsilon)};
}

namespace {

RectClass classify_or_ambiguous(const EdgeTransitions& et) {
    try {
        return classify_rectangle(et);
    } catch (const InternalConsistency&) {
        return {};
    }
}

} // namespace

RectVerification verify_rectangle(RootCache& cache, const MultiClassField& field, const Rect& rect, Axis axis,
                                  const RectClass& cls, int vn, double epsilon) {
    if (cls.tag == RectTag::Ambiguous) throw InvalidInput("only Polygonisable or TDM rectangles can be verified");
    if (vn < 1) throw InvalidInput("verification depth must be at least 1");

    RectVerification out;
    bool all_polygonisable = true;
    std::size_t tdm_leaves = 0;
    std::size_t other_leaves = 0;

    auto expand = [&](auto&& self, const EdgeTransitions& et, Axis a, int level) -> void {
        const SubdivisionChoice choice = choose_subdivision(et, a, epsilon);
        const auto [lower, upper] = et.rect.split(choice.axis, choice.position);
        for (const Rect& child : {lower, upper}) {
            const EdgeTransitions child_et = collect_edge_transitions(cache, field, child, vn, epsilon);
            const RectClass c = classify_or_ambiguous(child_et);
            ++out.nodes;
            if (c.tag != RectTag::Polygonisable) all_polygonisable = false;
            if (level + 1 == vn) {
                if (c.tag == RectTag::TDM) {
                    ++tdm_leaves;
                } else if (c.tag != RectTag::Polygonisable) {
                    ++other_leaves;
                }
            } else {
                self(self, child_et, flip(choice.axis), level + 1);
            }
        }
    };
    expand(expand, collect_edge_transitions(cache, field, rect, vn, epsilon), axis, 0);

    if (cls.tag == RectTag::Polygonisable) {
        out.verified = all_polygonisable;
    } else {
        out.verified = tdm_leaves == 1 && other_leaves == 0;
    }
    return out;
}

GeometricDecision apply_geometric_criterion(const MultiClassField& field, const BoundarySegment& seg, double delta) {
    GeometricDecision out;
    const Vec2 chord = seg.p1 - seg.p0;
    out.length = norm(chord);
    const Point2 mid = seg.p0 + 0.5 * chord;
    out.axis = std::abs(chord.x) >= std::abs(chord.y) ? Axis::X : Axis::Y;
    out.position = along(mid, out.axis);
    if (!(out.length > delta)) return out;

    const Vec2 n1 = field.gradient(seg.p0, seg.pair.lo) - field.gradient(seg.p0, seg.pair.hi);
    const Vec2 n2 = field.gradient(seg.p1, seg.pair.lo) - field.gradient(seg.p1, seg.pair.hi);
    const double m1 = norm(n1);
    const double m2 = norm(n2);
    if (m1 == 0.0 || m2 == 0.0) {
        out.zero_gradient = true;
        return out;
    }
    const double det = cross(n1, n2);
    if (std::abs(det) <= 1e-12 * m1 * m2) return out; // parallel tangents

    const double c1 = dot(n1, seg.p0);
    const double c2 = dot(n2, seg.p1);
    const Point2 xi{(c1 * n2.y - c2 * n1.y) / det, (n1.x * c2 - n2.x * c1) / det};
    out.distance = std::abs(cross(chord, xi - seg.p0)) / out.length;
    out.subdivide = out.distance > delta && out.length > delta;
    return out;
}

std::vector<BoundarySegment> connect_edges(const EdgeTransitions& et, const RectClass& cls,
                                           std::optional<Point2> junction) {
    const auto t = boundary_transitions(et, true);
    std::vector<BoundarySegment> out;
    auto chord = [&](const Transition& a, const Transition& b) {
        if (a.pair() != b.pair()) throw InternalConsistency("chord joins transitions of different class pairs");
        out.push_back({a.point, b.point, a.pair()});
    };

    if (cls.tag == RectTag::Polygonisable) {
        if (t.size() == 2) {
            chord(t[0], t[1]);
        } else if (t.size() == 4) {
            const int option = pairing_valid(t, 0) ? 0 : 1;
            if (!pairing_valid(t, option)) throw InternalConsistency("four transitions admit no pairing");
            chord(t[option], t[option + 1]);
            chord(t[(option + 2) % 4], t[(option + 3) % 4]);
        } else if (!t.empty()) {
            throw InternalConsistency(std::to_string(t.size()) + " transitions in a polygonisable rectangle");
        }
    } else if (cls.tag == RectTag::TDM) {
        if (t.size() != 3) throw InternalConsistency("TDM rectangle without exactly three transitions");
        if (!junction || !et.rect.contains(*junction)) throw InvalidInput("TDM connection needs a junction inside the rectangle");
        for (const Transition& tr : t) out.push_back({tr.point, *junction, tr.pair()});
    } else {
        throw InternalConsistency("ambiguous rectangles cannot be connected");
    }
    return out;
}

std::vector<BoundarySegment> connect_best_effort(const EdgeTransitions& et, std::vector<Point2>* junctions) {
    const auto t = boundary_transitions(et, false);
    std::vector<BoundarySegment> out;
    std::vector<Transition> stack;
    for (const Transition& tr : t) {
        if (!stack.empty() && stack.back().pair() == tr.pair()) {
            out.push_back({stack.back().point, tr.point, tr.pair()});
            stack.pop_back();
        } else {
            stack.push_back(tr);
        }
    }
    if (stack.empty()) return out;

    const Point2 c = et.rect.center();
    for (const Transition& tr : stack) out.push_back({tr.point, c, tr.pair()});
    if (junctions && stack.size() == 3) {
        std::set<ClassPair> pairs;
        std::set<ClassId> classes;
        for (const Transition& tr : stack) {
            pairs.insert(tr.pair());
            classes.insert(tr.from);
            classes.insert(tr.to);
        }
        if (pairs.size() == 3 && classes.size() == 3) junctions->push_back(c);
    }
    return out;
}

namespace {

struct StackItem {
    Rect rect;
    Axis axis = Axis::X;
    EdgeTransitions et;
    RectClass cls;
    bool consistent = true;
};

class Polygoniser {
public:
    Polygoniser(const MultiClassField& field, const Rect& root, const PolygoniseParams& params)
        : field_(field), root_(root), params_(params) {}

    PolygoniseResult run() {
        push(make_item(root_, Axis::X));
        while (!v_.empty() || !s_.empty()) {
            if (!v_.empty()) {
                StackItem item = std::move(v_.back());
                v_.pop_back();
                process_verification(std::move(item));
            } else {
                StackItem item = std::move(s_.back());
                s_.pop_back();
                process_normal(std::move(item));
            }
        }
        result_.network = build_network(segments_, root_, junctions_);
        auto& w = result_.network.warnings;
        w.insert(w.begin(), warnings_.begin(), warnings_.end());
        return std::move(result_);
    }

private:
    StackItem make_item(const Rect& r, Axis axis) {
        StackItem item;
        item.rect = r;
        item.axis = axis;
        item.et = collect_edge_transitions(cache_, field_, r, params_.vn, params_.epsilon, &warnings_);
        try {
            item.cls = classify_rectangle(item.et);
        } catch (const InternalConsistency&) {
            item.cls = {};
            item.consistent = false;
        }
        return item;
    }

    void trace(PolyTraceEvent::Stack stack, std::size_t v, std::size_t s, const StackItem& item, const char* action) {
        if (!params_.trace) return;
        params_.trace({stack, v, s, item.rect, item.cls.tag, action});
    }

    void push(StackItem item) {
        if (item.cls.tag == RectTag::Ambiguous) {
            s_.push_back(std::move(item));
        } else {
            v_.push_back(std::move(item));
        }
    }

    void demote(StackItem item) {
        item.cls = {};
        s_.push_back(std::move(item));
    }

    void store(const StackItem& item, std::vector<BoundarySegment> segs, bool at_limit) {
        segments_.insert(segments_.end(), segs.begin(), segs.end());
        result_.leaves.push_back({item.rect, item.cls.tag, at_limit});
    }

    void split_and_push(const StackItem& item, Axis axis, double position) {
        const auto [lower, upper] = item.rect.split(axis, position);
        push(make_item(lower, flip(axis)));
        push(make_item(upper, flip(axis)));
    }

    std::optional<Point2> junction_for(const StackItem& item) {
        JunctionProblem problem = JunctionProblem::for_classes(field_, item.cls.classes, item.rect, params_.epsilon);
        problem.max_iterations = params_.junction_max_iterations;
        problem.max_evaluations = params_.junction_max_evaluations;
        try {
            const JunctionResult j = find_triple_junction(problem);
            ++result_.junctions;
            if (j.fallback_invoked) ++result_.junction_fallbacks;
            return j.point;
        } catch (const JunctionNotFound&) {
            return std::nullopt;
        }
    }

    void finish_at_limit(StackItem item) {
        if (item.consistent && item.cls.tag == RectTag::Polygonisable) {
            store(item, connect_edges(item.et, item.cls), true);
            return;
        }
        if (item.consistent && item.cls.tag == RectTag::TDM) {
            std::optional<Point2> j = junction_for(item);
            if (!j) {
                j = item.rect.center();
                warnings_.push_back("epsilon limit at " + rect_text(item.rect) +
                                    ": triple junction not found, using the rectangle center");
            }
            junctions_.push_back(*j);
            store(item, connect_edges(item.et, item.cls, j), true);
            return;
        }
        warnings_.push_back("epsilon limit at " + rect_text(item.rect) + ": ambiguous rectangle connected best-effort");
        store(item, connect_best_effort(item.et, &junctions_), true);
    }

    void process_verification(StackItem item) {
        const std::size_t v_before = v_.size() + 1;
        ++result_.rectangles_processed;
        using St = PolyTraceEvent::Stack;

        if (item.rect.shorter_side() < params_.epsilon) {
            trace(St::Verification, v_before, s_.size(), item, "epsilon_limit");
            finish_at_limit(std::move(item));
            return;
        }
        const RectVerification ver =
            verify_rectangle(cache_, field_, item.rect, item.axis, item.cls, params_.vn, params_.epsilon);
        if (!ver.verified) {
            ++result_.verification_failures;
            trace(St::Verification, v_before, s_.size(), item, "verify_fail");
            demote(std::move(item));
            return;
        }

        std::optional<Point2> junction;
        if (item.cls.tag == RectTag::TDM) {
            junction = junction_for(item);
            if (!junction) {
                trace(St::Verification, v_before, s_.size(), item, "junction_fail");
                demote(std::move(item));
                return;
            }
        }

        std::vector<BoundarySegment> segs;
        try {
            segs = connect_edges(item.et, item.cls, junction);
        } catch (const InternalConsistency&) {
            trace(St::Verification, v_before, s_.size(), item, "connect_fail");
            demote(std::move(item));
            return;
        }

        if (std::isfinite(params_.delta)) {
            for (const BoundarySegment& seg : segs) {
                GeometricDecision g;
                try {
                    g = apply_geometric_criterion(field_, seg, params_.delta);
                } catch (const NumericalFailure&) {
                    g.zero_gradient = true;
                }
                if (g.zero_gradient) {
                    warnings_.push_back("zero gradient on a segment in " + rect_text(item.rect) +
                                        ": geometric criterion skipped");
                    continue;
                }
                if (!g.subdivide) continue;
                const Point2 mid = seg.p0 + 0.5 * (seg.p1 - seg.p0);
                for (Axis a : {g.axis, flip(g.axis)}) {
                    const double pos = along(mid, a);
                    if (pos - item.rect.lo(a) >= params_.epsilon && item.rect.hi(a) - pos >= params_.epsilon) {
                        ++result_.geometric_splits;
                        trace(St::Verification, v_before, s_.size(), item, "geometric_split");
                        split_and_push(item, a, pos);
                        return;
                    }
                }
            }
        }

        trace(St::Verification, v_before, s_.size(), item, "connect");
        if (junction) junctions_.push_back(*junction);
        store(item, std::move(segs), false);
    }

    void process_normal(StackItem item) {
        ++result_.rectangles_processed;
        using St = PolyTraceEvent::Stack;
        trace(St::Normal, v_.size(), s_.size() + 1, item,
              item.rect.shorter_side() < params_.epsilon ? "epsilon_limit" : "subdivide");
        if (item.rect.shorter_side() < params_.epsilon) {
            finish_at_limit(std::move(item));
            return;
        }
        const SubdivisionChoice choice = choose_subdivision(item.et, item.axis, params_.epsilon);
        split_and_push(item, choice.axis, choice.position);
    }

    const MultiClassField& field_;
    Rect root_;
    const PolygoniseParams& params_;
    RootCache cache_;
    std::vector<StackItem> v_;
    std::vector<StackItem> s_;
    std::vector<BoundarySegment> segments_;
    std::vector<Point2> junctions_;
    std::vector<std::string> warnings_;
    PolygoniseResult result_;
};

} // namespace

PolygoniseResult polygonise(const MultiClassField& field, const Rect& root, const PolygoniseParams& params) {
    if (!root.valid()) throw InvalidInput("root rectangle must satisfy x_lo < x_hi and y_lo < y_hi");
    if (params.vn < 1) throw InvalidInput("verification depth must be at least 1");
    if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) throw InvalidInput("epsilon must be positive");
    if (!(params.epsilon < root.shorter_side())) throw InvalidInput("epsilon must be smaller than the domain sides");
    if (!(params.delta > 0.0)) throw InvalidInput("delta must be positive (infinity disables it)");
    return Polygoniser(field, root, params).run();
}

} // namespace mcbound
