#include "mcbound/oracle.hpp"

#include "mcbound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace mcbound {

Point2 ClassGrid::cell_center(std::size_t i, std::size_t j) const {
    return {bounds.x_lo + (static_cast<double>(i) + 0.5) * cell_width(),
            bounds.y_lo + (static_cast<double>(j) + 0.5) * cell_height()};
}

ClassGrid rasterize(const MultiClassField& field, const Rect& bounds, std::size_t nx, std::size_t ny) {
    if (nx < 2 || ny < 2) throw InvalidInput("grid resolution must be at least 2 per axis");
    if (!bounds.valid()) throw InvalidInput("grid bounds must be a valid rectangle");
    ClassGrid g;
    g.nx = nx;
    g.ny = ny;
    g.bounds = bounds;
    g.class_count = field.class_count();
    g.labels.resize(nx * ny);
    std::vector<double> buf(field.class_count());
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            field.evaluate_into(g.cell_center(i, j), buf);
            g.labels[j * nx + i] = argmax_of(buf).index;
        }
    }
    return g;
}

std::string grid_to_text(const ClassGrid& grid) {
    std::string out = std::to_string(grid.nx) + " " + std::to_string(grid.ny) + " " +
                      std::to_string(grid.class_count) + "\n";
    for (std::size_t j = 0; j < grid.ny; ++j) {
        for (std::size_t i = 0; i < grid.nx; ++i) {
            if (i) out += ' ';
            out += std::to_string(grid.at(i, j));
        }
        out += '\n';
    }
    return out;
}

namespace {

std::uint32_t flip_label(std::uint32_t label, ClassPair pair) {
    if (label == pair.lo.index) return pair.hi.index;
    if (label == pair.hi.index) return pair.lo.index;
    return kUnknownLabel;
}

double min_segment_distance(const EdgeNetwork& net, Point2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < net.segments.size(); ++s) {
        const auto g = net.segment_geometry(s);
        best = std::min(best, point_segment_distance(p, g.p0, g.p1));
    }
    return best;
}

// Perimeter coordinate, counter-clockwise from (x_lo, y_lo).
double perimeter_param(const Rect& r, Point2 p) {
    const double w = r.width();
    const double h = r.height();
    if (p.y == r.y_lo && p.x < r.x_hi) return p.x - r.x_lo;
    if (p.x == r.x_hi && p.y < r.y_hi) return w + (p.y - r.y_lo);
    if (p.y == r.y_hi && p.x > r.x_lo) return w + h + (r.x_hi - p.x);
    return 2.0 * w + h + (r.y_hi - p.y);
}

// Tangent of the border walked into the point at perimeter parameter s.
Vec2 incoming_tangent(const Rect& r, double s) {
    const double w = r.width();
    const double h = r.height();
    if (s > 0.0 && s <= w) return {1.0, 0.0};
    if (s > w && s <= w + h) return {0.0, 1.0};
    if (s > w + h && s <= 2.0 * w + h) return {-1.0, 0.0};
    return {0.0, -1.0};
}

// Labels of the border arcs between consecutive border vertices.
class BorderLabels {
public:
    BorderLabels(const EdgeNetwork& net, const ClassGrid& grid) : rect_(net.bounds) {
        std::map<double, std::vector<std::pair<double, ClassPair>>> events; // s -> (angle, pair)
        for (const auto& seg : net.segments) {
            for (int end = 0; end < 2; ++end) {
                const std::size_t vi = end == 0 ? seg.v0 : seg.v1;
                const std::size_t vo = end == 0 ? seg.v1 : seg.v0;
                const Point2 p = net.vertices[vi].position;
                if (!rect_.on_border(p)) continue;
                const double s = perimeter_param(rect_, p);
                const Vec2 t = incoming_tangent(rect_, s);
                const Vec2 d = net.vertices[vo].position - p;
                events[s].push_back({std::atan2(cross(t, d), dot(t, d)), seg.pair});
            }
        }
        for (auto& [s, list] : events) {
            std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
            stops_.push_back(s);
            flips_.push_back({});
            for (const auto& e : list) flips_.back().push_back(e.second);
        }

        // anchor: the border-row/column cell whose center is farthest from all segments
        double best = -1.0;
        Point2 anchor_point;
        std::uint32_t anchor_label = 0;
        auto consider = [&](std::size_t i, std::size_t j, Point2 border) {
            const double d = min_segment_distance(net, grid.cell_center(i, j));
            if (d > best) {
                best = d;
                anchor_point = border;
                anchor_label = grid.at(i, j);
            }
        };
        const std::size_t step_x = std::max<std::size_t>(1, grid.nx / 64);
        const std::size_t step_y = std::max<std::size_t>(1, grid.ny / 64);
        for (std::size_t i = 0; i < grid.nx; i += step_x) {
            consider(i, 0, {grid.cell_center(i, 0).x, rect_.y_lo});
            consider(i, grid.ny - 1, {grid.cell_center(i, grid.ny - 1).x, rect_.y_hi});
        }
        for (std::size_t j = 0; j < grid.ny; j += step_y) {
            consider(0, j, {rect_.x_lo, grid.cell_center(0, j).y});
            consider(grid.nx - 1, j, {rect_.x_hi, grid.cell_center(grid.nx - 1, j).y});
        }

        // arc k is (stops_[k-1], stops_[k]]; the stretch before stops_[0] and after the last
        // stop is one arc, numbered 0
        const std::size_t n = stops_.size();
        labels_.assign(std::max<std::size_t>(n, 1), kUnknownLabel);
        if (n == 0) {
            labels_[0] = anchor_label;
            return;
        }
        const std::size_t anchor_arc = arc_of(perimeter_param(rect_, anchor_point));
        std::uint32_t label = anchor_label;
        std::size_t arc = anchor_arc;
        for (std::size_t step = 0; step < n; ++step) {
            labels_[arc] = label;
            for (const ClassPair& pair : flips_[arc]) label = flip_label(label, pair);
            arc = (arc + 1) % n;
        }
        if (label != anchor_label) throw NotWatertight("border labels do not close around the domain");
    }

    std::uint32_t at(Point2 border_point) const {
        if (stops_.empty()) return labels_[0];
        return labels_[arc_of(perimeter_param(rect_, border_point))];
    }

private:
    std::size_t arc_of(double s) const {
        const auto k = static_cast<std::size_t>(std::upper_bound(stops_.begin(), stops_.end(), s) - stops_.begin());
        return k % stops_.size();
    }

    Rect rect_;
    std::vector<double> stops_;
    std::vector<std::vector<ClassPair>> flips_;
    std::vector<std::uint32_t> labels_;
};

struct Crossing {
    double at;
    ClassPair pair;
};

// Segments crossing the line (axis coordinate `c` fixed on the other axis), half-open in c.
std::vector<Crossing> crossings_on_line(const EdgeNetwork& net, bool horizontal, double c) {
    std::vector<Crossing> out;
    for (std::size_t s = 0; s < net.segments.size(); ++s) {
        const auto g = net.segment_geometry(s);
        const double a0 = horizontal ? g.p0.y : g.p0.x;
        const double a1 = horizontal ? g.p1.y : g.p1.x;
        const double lo = std::min(a0, a1);
        const double hi = std::max(a0, a1);
        if (!(lo <= c && c < hi)) continue;
        const double t = (c - a0) / (a1 - a0);
        const double b0 = horizontal ? g.p0.x : g.p0.y;
        const double b1 = horizontal ? g.p1.x : g.p1.y;
        out.push_back({b0 + t * (b1 - b0), g.pair});
    }
    std::sort(out.begin(), out.end(), [](const Crossing& l, const Crossing& r) { return l.at < r.at; });
    return out;
}

} // namespace

std::vector<std::uint32_t> network_labels(const EdgeNetwork& net, const ClassGrid& grid, RayDirection dir) {
    if (!(net.bounds == grid.bounds)) throw InvalidInput("network and grid bounds differ");
    const WatertightReport report = check_watertight(net);
    if (!report.watertight()) throw NotWatertight("network is not watertight: " + report.to_json());

    const BorderLabels border(net, grid);
    std::vector<std::uint32_t> out(grid.nx * grid.ny, kUnknownLabel);
    const Rect& b = grid.bounds;
    const bool horizontal = dir == RayDirection::NegX || dir == RayDirection::PosX;
    const bool toward_lo = dir == RayDirection::NegX || dir == RayDirection::NegY;
    const std::size_t lines = horizontal ? grid.ny : grid.nx;
    const std::size_t cells = horizontal ? grid.nx : grid.ny;

    for (std::size_t line = 0; line < lines; ++line) {
        const Point2 any = horizontal ? grid.cell_center(0, line) : grid.cell_center(line, 0);
        const double c = horizontal ? any.y : any.x;
        const auto xs = crossings_on_line(net, horizontal, c);
        Point2 start;
        if (horizontal) {
            start = {toward_lo ? b.x_lo : b.x_hi, c};
        } else {
            start = {c, toward_lo ? b.y_lo : b.y_hi};
        }
        std::uint32_t label = border.at(start);

        auto cell_coord = [&](std::size_t k) {
            const Point2 p = horizontal ? grid.cell_center(k, line) : grid.cell_center(line, k);
            return horizontal ? p.x : p.y;
        };
        auto index = [&](std::size_t k) { return horizontal ? line * grid.nx + k : k * grid.nx + line; };

        if (toward_lo) {
            std::size_t next = 0;
            for (std::size_t k = 0; k < cells; ++k) {
                const double at = cell_coord(k);
                while (next < xs.size() && xs[next].at < at) label = flip_label(label, xs[next++].pair);
                out[index(k)] = label;
            }
        } else {
            std::size_t next = xs.size();
            for (std::size_t kk = cells; kk-- > 0;) {
                const double at = cell_coord(kk);
                while (next > 0 && xs[next - 1].at > at) label = flip_label(label, xs[--next].pair);
                out[index(kk)] = label;
            }
        }
    }
    return out;
}

std::vector<bool> exclusion_mask(const EdgeNetwork& net, const ClassGrid& grid, double exclusion) {
    std::vector<bool> mask(grid.nx * grid.ny, false);
    const double cw = grid.cell_width();
    const double ch = grid.cell_height();
    const Rect& b = grid.bounds;
    auto clamp_index = [](double v, std::size_t n) {
        if (v < 0.0) return std::size_t{0};
        if (v >= static_cast<double>(n)) return n - 1;
        return static_cast<std::size_t>(v);
    };
    for (std::size_t s = 0; s < net.segments.size(); ++s) {
        const auto g = net.segment_geometry(s);
        const double y0 = std::min(g.p0.y, g.p1.y) - exclusion;
        const double y1 = std::max(g.p0.y, g.p1.y) + exclusion;
        const std::size_t j0 = clamp_index(std::floor((y0 - b.y_lo) / ch - 0.5), grid.ny);
        const std::size_t j1 = clamp_index(std::ceil((y1 - b.y_lo) / ch - 0.5), grid.ny);
        for (std::size_t j = j0; j <= j1; ++j) {
            const double yc = grid.cell_center(0, j).y;
            // x-range of the segment inside the band |y - yc| <= exclusion, widened by exclusion
            double xa = std::min(g.p0.x, g.p1.x);
            double xb = std::max(g.p0.x, g.p1.x);
            if (g.p0.y != g.p1.y) {
                auto x_at = [&](double y) { return g.p0.x + (y - g.p0.y) / (g.p1.y - g.p0.y) * (g.p1.x - g.p0.x); };
                const double ya = std::clamp(yc - exclusion, std::min(g.p0.y, g.p1.y), std::max(g.p0.y, g.p1.y));
                const double yb = std::clamp(yc + exclusion, std::min(g.p0.y, g.p1.y), std::max(g.p0.y, g.p1.y));
                xa = std::min(x_at(ya), x_at(yb));
                xb = std::max(x_at(ya), x_at(yb));
            }
            const std::size_t i0 = clamp_index(std::floor((xa - exclusion - b.x_lo) / cw - 0.5), grid.nx);
            const std::size_t i1 = clamp_index(std::ceil((xb + exclusion - b.x_lo) / cw - 0.5), grid.nx);
            for (std::size_t i = i0; i <= i1; ++i) {
                if (point_segment_distance(grid.cell_center(i, j), g.p0, g.p1) <= exclusion) mask[j * grid.nx + i] = true;
            }
        }
    }
    return mask;
}

AgreementResult region_agreement(const EdgeNetwork& net, const ClassGrid& grid, double exclusion, RayDirection dir) {
    const auto labels = network_labels(net, grid, dir);
    const auto mask = exclusion_mask(net, grid, exclusion);
    AgreementResult r;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (mask[i]) {
            ++r.excluded;
            continue;
        }
        ++r.compared;
        if (labels[i] == grid.labels[i]) ++r.agreeing;
    }
    r.fraction = r.compared == 0 ? 1.0 : static_cast<double>(r.agreeing) / static_cast<double>(r.compared);
    return r;
}

double boundary_hausdorff(const EdgeNetwork& net, const std::vector<Point2>& boundary_samples,
                          const std::function<double(Point2)>& boundary_distance) {
    if (net.segments.empty()) return boundary_samples.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (Point2 p : boundary_samples) worst = std::max(worst, min_segment_distance(net, p));
    for (std::size_t s = 0; s < net.segments.size(); ++s) {
        const auto g = net.segment_geometry(s);
        for (Point2 p : {g.p0, g.p1, g.p0 + 0.5 * (g.p1 - g.p0)}) worst = std::max(worst, boundary_distance(p));
    }
    return worst;
}

double boundary_hausdorff(const EdgeNetwork& net, const ReferenceBoundary& boundary, std::size_t n_samples) {
    if (boundary.kind == ReferenceBoundary::Kind::None) throw InvalidInput("field has no analytic boundary");
    return boundary_hausdorff(net, boundary.sample(n_samples, net.bounds),
                              [&](Point2 p) { return boundary.distance(p); });
}

} // namespace mcbound
