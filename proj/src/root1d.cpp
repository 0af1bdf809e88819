#include "mcbound/root1d.hpp"

#include "mcbound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace mcbound {

namespace {

constexpr double kTinyDerivative = 1e-300;

// Memoised top-two rankings along one line; bisection revisits endpoints constantly.
class LineSampler {
public:
    LineSampler(const MultiClassField& field, AxisLine line) : field_(field), line_(line) {}

    std::pair<ClassId, ClassId> top_two(double t) {
        auto it = memo_.find(t);
        if (it != memo_.end()) return it->second;
        const auto r = field_.top_two(line_.at(t));
        memo_.emplace(t, r);
        return r;
    }

    ClassId classify(double t) { return top_two(t).first; }

    IntervalClass classify(Interval1D iv) {
        const auto [i1, i2] = top_two(iv.lo);
        const auto [j1, j2] = top_two(iv.hi);
        if (i1 == j1) return IntervalClass::consistent(i1);
        if (i1 == j2 && j1 == i2) return IntervalClass::potential_root(i1, j1);
        return IntervalClass::ambiguous();
    }

    const MultiClassField& field() const { return field_; }
    AxisLine line() const { return line_; }

private:
    const MultiClassField& field_;
    AxisLine line_;
    std::unordered_map<double, std::pair<ClassId, ClassId>> memo_;
};

IntervalVerification verify_with(LineSampler& sampler, Interval1D iv, IntervalClass cls, int depth) {
    IntervalVerification out;
    if (depth < 1) throw InvalidInput("verification depth must be at least 1");
    if (cls.tag == IntervalClass::Tag::Ambiguous) throw InvalidInput("only consistent or potential-root intervals verify");

    std::vector<Interval1D> level{iv};
    bool all_consistent = true;
    for (int d = 0; d < depth; ++d) {
        std::vector<Interval1D> next;
        next.reserve(level.size() * 2);
        for (const Interval1D& node : level) {
            const double m = node.mid();
            next.push_back({node.lo, m});
            next.push_back({m, node.hi});
        }
        for (const Interval1D& node : next) {
            ++out.nodes;
            const IntervalClass c = sampler.classify(node);
            if (c != IntervalClass::consistent(cls.a)) all_consistent = false;
        }
        level = std::move(next);
    }

    if (cls.tag == IntervalClass::Tag::Consistent) {
        out.verified = all_consistent;
        return out;
    }

    std::size_t root_leaves = 0;
    bool others_consistent = true;
    for (const Interval1D& leaf : level) {
        const IntervalClass c = sampler.classify(leaf);
        if (c == cls) {
            ++root_leaves;
            out.root_leaf = leaf;
        } else if (c.tag != IntervalClass::Tag::Consistent) {
            others_consistent = false;
        }
    }
    out.verified = root_leaves == 1 && others_consistent;
    if (!out.verified) out.root_leaf.reset();
    return out;
}

std::string describe(AxisLine line, Interval1D iv) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s=%.17g on [%.17g, %.17g]", line.axis == Axis::X ? "y" : "x", line.fixed, iv.lo,
                  iv.hi);
    return buf;
}

// Collapses runs of roots closer than epsilon into one root spanning the outer flanks.
std::vector<Root1D> merge_close(std::vector<Root1D> roots, double epsilon) {
    std::sort(roots.begin(), roots.end(), [](const Root1D& l, const Root1D& r) { return l.position < r.position; });
    std::vector<Root1D> out;
    for (std::size_t i = 0; i < roots.size();) {
        std::size_t j = i;
        double sum = roots[i].position;
        while (j + 1 < roots.size() && roots[j + 1].position - roots[j].position <= epsilon) {
            ++j;
            sum += roots[j].position;
        }
        if (j == i) {
            out.push_back(roots[i]);
        } else if (roots[i].left_class != roots[j].right_class) {
            Root1D merged = roots[i];
            merged.position = sum / static_cast<double>(j - i + 1);
            merged.right_class = roots[j].right_class;
            out.push_back(merged);
        }
        i = j + 1;
    }
    return out;
}

} // namespace

const char* interval_class_name(IntervalClass::Tag tag) {
    switch (tag) {
    case IntervalClass::Tag::Consistent: return "consistent";
    case IntervalClass::Tag::PotentialRoot: return "potential_root";
    case IntervalClass::Tag::Ambiguous: return "ambiguous";
    }
    return "unknown";
}

LineFunction pair_difference(const MultiClassField& field, AxisLine line, ClassId a, ClassId b) {
    LineFunction g;
    g.value = [&field, line, a, b](double t) {
        thread_local std::vector<double> buf;
        buf.resize(field.class_count());
        field.evaluate_into(line.at(t), buf);
        return buf[a.index] - buf[b.index];
    };
    g.derivative = [&field, line, a, b](double t) {
        const Point2 p = line.at(t);
        return along(field.gradient(p, a) - field.gradient(p, b), line.axis);
    };
    return g;
}

IntervalClass classify_interval(const MultiClassField& field, AxisLine line, Interval1D iv) {
    if (!iv.valid()) throw InvalidInput("interval must satisfy lo < hi");
    LineSampler sampler(field, line);
    return sampler.classify(iv);
}

RootLikelihood gradient_localisation(const LineFunction& g, Interval1D iv) {
    if (!iv.valid()) throw InvalidInput("interval must satisfy lo < hi");
    const double g1 = g.value(iv.lo);
    const double g2 = g.value(iv.hi);
    const double d1 = g.derivative(iv.lo);
    const double d2 = g.derivative(iv.hi);

    RootLikelihood out;
    if (std::abs(d1) >= kTinyDerivative) out.x1_star = iv.lo - g1 / d1;
    if (std::abs(d2) >= kTinyDerivative) out.x2_star = iv.hi - g2 / d2;

    const double width = iv.width();
    const bool sign_change = g1 * g2 < 0.0;
    auto inside = [&](const std::optional<double>& x) { return x && *x >= iv.lo && *x <= iv.hi; };
    auto near = [&](const std::optional<double>& x) { return x && *x >= iv.lo - width && *x <= iv.hi + width; };

    if (sign_change && inside(out.x1_star) && inside(out.x2_star)) {
        out.tag = RootLikelihood::Tag::DefiniteWithin;
    } else if (sign_change || near(out.x1_star) || near(out.x2_star)) {
        out.tag = RootLikelihood::Tag::PossibleNear;
    } else {
        out.tag = RootLikelihood::Tag::Unlikely;
    }
    return out;
}

RootLikelihood gradient_localisation(const MultiClassField& field, AxisLine line, Interval1D iv, ClassId a, ClassId b) {
    return gradient_localisation(pair_difference(field, line, a, b), iv);
}

double refine_root(const LineFunction& g, Interval1D iv, double epsilon) {
    if (!iv.valid()) throw InvalidInput("interval must satisfy lo < hi");
    double lo = iv.lo;
    double hi = iv.hi;
    double f_lo = g.value(lo);
    double f_hi = g.value(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;

    const bool bracketed = f_lo * f_hi < 0.0;
    const double x_tol = 1e-3 * epsilon;

    if (!bracketed) {
        // plain Newton; only legal while it stays inside the interval
        double x = lo;
        for (int it = 0; it < 100; ++it) {
            const double f = g.value(x);
            if (f == 0.0) return x;
            const double d = g.derivative(x);
            if (std::abs(d) < kTinyDerivative) break;
            const double step = f / d;
            x -= step;
            if (!(x >= iv.lo && x <= iv.hi)) break;
            if (std::abs(step) <= x_tol) return x;
        }
        throw RefinementFailure("no sign change and Newton left the interval");
    }

    // orient so that g(neg) < 0 < g(pos)
    double neg = f_lo < 0.0 ? lo : hi;
    double pos = f_lo < 0.0 ? hi : lo;
    double x = lo;
    double f = f_lo;
    double d = g.derivative(x);
    double dx_old = hi - lo;
    double dx = dx_old;
    for (int it = 0; it < 300; ++it) {
        const double a = std::min(neg, pos);
        const double b = std::max(neg, pos);
        const bool newton_ok = std::abs(d) >= kTinyDerivative && ((x - b) * d - f) * ((x - a) * d - f) < 0.0 &&
                               std::abs(2.0 * f) <= std::abs(dx_old * d);
        if (newton_ok) {
            dx_old = dx;
            dx = f / d;
            x -= dx;
        } else {
            dx_old = dx;
            dx = 0.5 * (b - a);
            x = a + dx;
        }
        if (std::abs(dx) <= x_tol || b - a <= epsilon) return std::clamp(x, iv.lo, iv.hi);
        f = g.value(x);
        if (f == 0.0) return x;
        d = g.derivative(x);
        if (f < 0.0) {
            neg = x;
        } else {
            pos = x;
        }
    }
    return std::clamp(x, iv.lo, iv.hi);
}

double refine_root(const MultiClassField& field, AxisLine line, Interval1D iv, ClassId a, ClassId b, double epsilon) {
    return refine_root(pair_difference(field, line, a, b), iv, epsilon);
}

IntervalVerification verify_interval(const MultiClassField& field, AxisLine line, Interval1D iv, IntervalClass cls,
                                     int depth) {
    if (!iv.valid()) throw InvalidInput("interval must satisfy lo < hi");
    LineSampler sampler(field, line);
    return verify_with(sampler, iv, cls, depth);
}

RootScan find_roots(const MultiClassField& field, AxisLine line, Interval1D iv, int depth, double epsilon,
                    const RootTraceSink& trace) {
    if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
    if (!iv.valid() || !(iv.width() > epsilon)) throw InvalidInput("interval must be wider than epsilon");
    if (!std::isfinite(line.fixed)) throw InvalidInput("line coordinate must be finite");
    if (depth < 1) throw InvalidInput("verification depth must be at least 1");

    struct Item {
        Interval1D iv;
        IntervalClass cls;
    };

    LineSampler sampler(field, line);
    RootScan scan;
    std::deque<Item> qv;
    std::deque<Item> qn;

    auto route = [&](Interval1D child) {
        const IntervalClass c = sampler.classify(child);
        if (c.tag == IntervalClass::Tag::Ambiguous) {
            qn.push_back({child, c});
        } else {
            qv.push_back({child, c});
        }
    };
    auto record = [&](double position, ClassId left, ClassId right) {
        scan.roots.push_back(Root1D{position, left, right, line});
    };
    auto limit_root = [&](Interval1D at) {
        const ClassId left = sampler.classify(at.lo);
        const ClassId right = sampler.classify(at.hi);
        if (left == right) return;
        record(at.mid(), left, right);
        scan.warnings.push_back("root interval reached the epsilon limit at " + describe(line, at));
    };

    route(iv);
    while (!qv.empty() || !qn.empty()) {
        if (!qv.empty()) {
            const Item item = qv.front();
            RootTraceEvent ev{RootTraceEvent::Queue::Verification, qv.size(), qn.size(), item.iv, ""};
            qv.pop_front();
            if (item.iv.width() < epsilon) {
                if (item.cls.tag == IntervalClass::Tag::PotentialRoot) limit_root(item.iv);
                ev.action = "epsilon_limit";
                if (trace) trace(ev);
                continue;
            }
            const IntervalVerification v = verify_with(sampler, item.iv, item.cls, depth);
            if (!v.verified) {
                qn.push_back(item);
                ev.action = "verify_fail";
                if (trace) trace(ev);
                continue;
            }
            if (item.cls.tag == IntervalClass::Tag::Consistent) {
                ev.action = "verified_consistent";
                if (trace) trace(ev);
                continue;
            }
            const LineFunction g = pair_difference(field, line, item.cls.a, item.cls.b);
            // an exact tie at a leaf end is the transition itself
            const Interval1D leaf = *v.root_leaf;
            if (g.value(leaf.lo) == 0.0 || g.value(leaf.hi) == 0.0) {
                record(g.value(leaf.lo) == 0.0 ? leaf.lo : leaf.hi, item.cls.a, item.cls.b);
                ev.action = "root";
                if (trace) trace(ev);
                continue;
            }
            const RootLikelihood lk = gradient_localisation(g, item.iv);
            if (lk.tag != RootLikelihood::Tag::DefiniteWithin) {
                // no definite root yet: subdivide further
                qn.push_back(item);
                ev.action = "demote";
                if (trace) trace(ev);
                continue;
            }
            record(refine_root(g, leaf, epsilon), item.cls.a, item.cls.b);
            ev.action = "root";
            if (trace) trace(ev);
        } else {
            const Item item = qn.front();
            RootTraceEvent ev{RootTraceEvent::Queue::Normal, qv.size(), qn.size(), item.iv, ""};
            qn.pop_front();
            if (item.iv.width() < epsilon) {
                limit_root(item.iv);
                ev.action = "epsilon_limit";
                if (trace) trace(ev);
                continue;
            }
            const double m = item.iv.mid();
            route({item.iv.lo, m});
            route({m, item.iv.hi});
            ev.action = "bisect";
            if (trace) trace(ev);
        }
    }

    scan.roots = merge_close(std::move(scan.roots), epsilon);
    return scan;
}

const RootCache::Piece* RootCache::piece_after(const LineEntry& entry, double t) {
    for (const Piece& p : entry.pieces) {
        if (p.span.lo <= t && t < p.span.hi) return &p;
    }
    return nullptr;
}

const RootCache::Piece* RootCache::piece_before(const LineEntry& entry, double t) {
    for (const Piece& p : entry.pieces) {
        if (p.span.lo < t && t <= p.span.hi) return &p;
    }
    return nullptr;
}

std::optional<ClassId> RootCache::class_after(const LineEntry& entry, double t) {
    const Piece* p = piece_after(entry, t);
    if (!p) return std::nullopt;
    ClassId c = p->base;
    for (const Root1D& r : entry.roots) {
        if (r.position > t) break;
        if (r.position >= p->span.lo) c = r.right_class;
    }
    return c;
}

std::optional<ClassId> RootCache::class_before(const LineEntry& entry, double t) {
    const Piece* p = piece_before(entry, t);
    if (!p) return std::nullopt;
    ClassId c = p->base;
    for (const Root1D& r : entry.roots) {
        if (r.position >= t) break;
        if (r.position >= p->span.lo) c = r.right_class;
    }
    return c;
}

void RootCache::insert_exact(LineEntry& entry, const Root1D& root) {
    auto it = std::lower_bound(entry.roots.begin(), entry.roots.end(), root.position,
                               [](const Root1D& r, double p) { return r.position < p; });
    if (it != entry.roots.end() && it->position == root.position) return;
    entry.roots.insert(it, root);
}

void RootCache::fill_gap(LineEntry& entry, const MultiClassField& field, AxisLine line, Interval1D gap, int depth,
                         double epsilon, std::vector<std::string>* warnings) {
    Piece piece{gap, {}};
    if (gap.width() > epsilon) {
        ++finder_runs_;
        RootScan scan = find_roots(field, line, gap, depth, epsilon);
        if (warnings) warnings->insert(warnings->end(), scan.warnings.begin(), scan.warnings.end());
        piece.base = scan.roots.empty() ? field.classify(line.at(gap.mid())) : scan.roots.front().left_class;
        for (std::size_t i = 0; i < scan.roots.size(); ++i) {
            const Root1D& r = scan.roots[i];
            // the same transition already found from a neighbouring piece
            auto dup = std::find_if(entry.roots.begin(), entry.roots.end(), [&](const Root1D& e) {
                return std::abs(e.position - r.position) <= epsilon && e.left_class == r.left_class &&
                       e.right_class == r.right_class;
            });
            if (dup != entry.roots.end()) {
                if (i == 0 && dup->position < gap.lo) piece.base = r.right_class;
                continue;
            }
            insert_exact(entry, r);
        }
    } else {
        const ClassId left = class_before(entry, gap.lo).value_or(field.classify(line.at(gap.lo)));
        const ClassId right = class_after(entry, gap.hi).value_or(field.classify(line.at(gap.hi)));
        piece.base = left;
        if (left != right) insert_exact(entry, Root1D{gap.mid(), left, right, line});
    }

    auto pos = std::lower_bound(entry.pieces.begin(), entry.pieces.end(), gap.lo,
                                [](const Piece& p, double v) { return p.span.lo < v; });
    entry.pieces.insert(pos, piece);

    // seams with touching pieces must not hide a class change
    for (double t : {gap.lo, gap.hi}) {
        const auto before = class_before(entry, t);
        const auto after = class_after(entry, t);
        if (!before || !after || *before == *after) continue;
        const bool has_root = std::any_of(entry.roots.begin(), entry.roots.end(),
                                          [&](const Root1D& r) { return r.position == t; });
        if (!has_root) insert_exact(entry, Root1D{t, *before, *after, line});
    }
}

LineQuery RootCache::query(const MultiClassField& field, AxisLine line, Interval1D iv, int depth, double epsilon,
                           std::vector<std::string>* warnings) {
    if (!iv.valid()) throw InvalidInput("interval must satisfy lo < hi");
    std::lock_guard lock(mutex_);
    LineEntry& entry = lines_[{static_cast<int>(line.axis), line.fixed}];

    std::vector<Interval1D> gaps;
    double cursor = iv.lo;
    for (const Piece& p : entry.pieces) {
        if (p.span.hi <= cursor) continue;
        if (p.span.lo >= iv.hi) break;
        if (p.span.lo > cursor) gaps.push_back({cursor, p.span.lo});
        cursor = std::max(cursor, p.span.hi);
        if (cursor >= iv.hi) break;
    }
    if (cursor < iv.hi) gaps.push_back({cursor, iv.hi});
    for (const Interval1D& gap : gaps) fill_gap(entry, field, line, gap, depth, epsilon, warnings);

    LineQuery out;
    out.start_class = *class_after(entry, iv.lo);
    for (const Root1D& r : entry.roots) {
        if (r.position < iv.lo || r.position > iv.hi) continue;
        Root1D q = r;
        q.left_class = class_before(entry, r.position).value_or(r.left_class);
        q.right_class = class_after(entry, r.position).value_or(r.right_class);
        if (q.left_class != q.right_class) out.roots.push_back(q);
    }
    return out;
}

std::size_t RootCache::line_count() const {
    std::lock_guard lock(mutex_);
    return lines_.size();
}

std::size_t RootCache::finder_runs() const {
    std::lock_guard lock(mutex_);
    return finder_runs_;
}

} // namespace mcbound
