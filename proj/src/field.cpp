#include "mcbound/field.hpp"

#include "mcbound/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace mcbound {

ClassId argmax_of(std::span<const double> p) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] > p[best]) best = i;
    }
    return ClassId{static_cast<std::uint32_t>(best)};
}

std::pair<ClassId, ClassId> top_two_of(std::span<const double> p) {
    // strict comparisons keep the smaller index on ties
    std::size_t first = 0;
    std::size_t second = 1;
    if (p[1] > p[0]) std::swap(first, second);
    for (std::size_t i = 2; i < p.size(); ++i) {
        if (p[i] > p[first]) {
            second = first;
            first = i;
        } else if (p[i] > p[second]) {
            second = i;
        }
    }
    return {ClassId{static_cast<std::uint32_t>(first)}, ClassId{static_cast<std::uint32_t>(second)}};
}

ClassId ProbabilityVector::argmax() const { return argmax_of(values_); }

std::pair<ClassId, ClassId> ProbabilityVector::top_two() const { return top_two_of(values_); }

double ReferenceBoundary::distance(Point2 p) const {
    switch (kind) {
    case Kind::Circle:
        return std::abs(norm(p - center) - radius);
    case Kind::VerticalLines: {
        double best = std::numeric_limits<double>::infinity();
        for (double x : xs) best = std::min(best, std::abs(p.x - x));
        return best;
    }
    case Kind::None:
        break;
    }
    return std::numeric_limits<double>::infinity();
}

std::vector<Point2> ReferenceBoundary::sample(std::size_t n, const Rect& bounds) const {
    std::vector<Point2> out;
    if (n == 0) return out;
    if (kind == Kind::Circle) {
        for (std::size_t i = 0; i < n; ++i) {
            const double t = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            const Point2 q{center.x + radius * std::cos(t), center.y + radius * std::sin(t)};
            if (bounds.contains(q)) out.push_back(q);
        }
    } else if (kind == Kind::VerticalLines) {
        std::vector<double> inside;
        for (double x : xs) {
            if (x >= bounds.x_lo && x <= bounds.x_hi) inside.push_back(x);
        }
        if (inside.empty()) return out;
        const std::size_t per_line = std::max<std::size_t>(1, n / inside.size());
        for (double x : inside) {
            for (std::size_t i = 0; i < per_line; ++i) {
                const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(per_line);
                out.push_back({x, bounds.y_lo + t * bounds.height()});
            }
        }
    }
    return out;
}

std::optional<Vec2> MultiClassField::analytic_gradient(Point2, ClassId) const { return std::nullopt; }

const ReferenceBoundary& MultiClassField::reference_boundary() const {
    static const ReferenceBoundary none{};
    return none;
}

void MultiClassField::check_point(Point2 p) const {
    if (!is_finite(p)) throw InvalidInput("field evaluation at a non-finite point");
}

ProbabilityVector MultiClassField::evaluate(Point2 p) const {
    check_point(p);
    std::vector<double> out(class_count());
    evaluate_into(p, out);
    return ProbabilityVector(std::move(out));
}

ClassId MultiClassField::classify(Point2 p) const {
    check_point(p);
    thread_local std::vector<double> buf;
    buf.resize(class_count());
    evaluate_into(p, buf);
    return argmax_of(buf);
}

std::pair<ClassId, ClassId> MultiClassField::top_two(Point2 p) const {
    check_point(p);
    thread_local std::vector<double> buf;
    buf.resize(class_count());
    evaluate_into(p, buf);
    return top_two_of(buf);
}

Vec2 MultiClassField::finite_difference_gradient(Point2 p, ClassId c) const {
    check_point(p);
    const double h = 1e-5 * std::max(1.0, norm(p));
    std::vector<double> a(class_count());
    std::vector<double> b(class_count());
    evaluate_into({p.x + h, p.y}, a);
    evaluate_into({p.x - h, p.y}, b);
    const double gx = (a[c.index] - b[c.index]) / (2.0 * h);
    evaluate_into({p.x, p.y + h}, a);
    evaluate_into({p.x, p.y - h}, b);
    const double gy = (a[c.index] - b[c.index]) / (2.0 * h);
    return {gx, gy};
}

Vec2 MultiClassField::gradient(Point2 p, ClassId c) const {
    check_point(p);
    if (c.index >= class_count()) throw InvalidInput("class index out of range");
    const auto analytic = analytic_gradient(p, c);
    const Vec2 g = analytic ? *analytic : finite_difference_gradient(p, c);
    if (!is_finite(g)) throw NumericalFailure("non-finite gradient");
    return g;
}

const char* field_kind_name(FieldKind kind) {
    switch (kind) {
    case FieldKind::SoftmaxRbf: return "softmax_rbf";
    case FieldKind::SmoothedVoronoi: return "smoothed_voronoi";
    case FieldKind::LinearPlanes: return "linear_planes";
    case FieldKind::Sigmoid1D: return "sigmoid_1d";
    }
    return "unknown";
}

std::optional<FieldKind> field_kind_from_name(const std::string& name) {
    for (FieldKind k : {FieldKind::SoftmaxRbf, FieldKind::SmoothedVoronoi, FieldKind::LinearPlanes,
                        FieldKind::Sigmoid1D}) {
        if (name == field_kind_name(k)) return k;
    }
    return std::nullopt;
}

namespace {

// p = softmax(s * inv_temperature) over per-class scores s_i with gradients ds_i.
class ScoreField : public MultiClassField {
public:
    ScoreField(std::size_t k, double inv_temperature, ReferenceBoundary boundary)
        : k_(k), inv_t_(inv_temperature), boundary_(std::move(boundary)) {}

    std::size_t class_count() const override { return k_; }

    void evaluate_into(Point2 p, std::span<double> out) const override {
        scores(p, out);
        softmax_in_place(out);
    }

    std::optional<Vec2> analytic_gradient(Point2 p, ClassId c) const override {
        thread_local std::vector<double> prob;
        thread_local std::vector<Vec2> ds;
        prob.resize(k_);
        ds.resize(k_);
        scores(p, prob);
        softmax_in_place(prob);
        score_gradients(p, ds);
        Vec2 mean{0.0, 0.0};
        for (std::size_t j = 0; j < k_; ++j) mean = mean + prob[j] * ds[j];
        return (prob[c.index] * inv_t_) * (ds[c.index] - mean);
    }

    const ReferenceBoundary& reference_boundary() const override { return boundary_; }

protected:
    virtual void scores(Point2 p, std::span<double> s) const = 0;
    virtual void score_gradients(Point2 p, std::span<Vec2> ds) const = 0;

private:
    void softmax_in_place(std::span<double> s) const {
        double m = -std::numeric_limits<double>::infinity();
        for (double v : s) m = std::max(m, v * inv_t_);
        double total = 0.0;
        for (double& v : s) {
            v = std::exp(v * inv_t_ - m);
            total += v;
        }
        for (double& v : s) v /= total;
    }

    std::size_t k_;
    double inv_t_;
    ReferenceBoundary boundary_;
};

class SoftmaxRbfField final : public ScoreField {
public:
    explicit SoftmaxRbfField(const FieldSpec& spec)
        : ScoreField(spec.k, 1.0 / spec.temperature, spec.boundary), classes_(spec.classes) {}

protected:
    void scores(Point2 p, std::span<double> s) const override {
        for (std::size_t i = 0; i < classes_.size(); ++i) {
            const ClassParams& cp = classes_[i];
            const double inv2w2 = 1.0 / (2.0 * cp.width * cp.width);
            double total = cp.bias;
            for (std::size_t c = 0; c < cp.centers.size(); ++c) {
                const Vec2 d = p - cp.centers[c];
                total += cp.weights[c] * std::exp(-dot(d, d) * inv2w2);
            }
            s[i] = total;
        }
    }

    void score_gradients(Point2 p, std::span<Vec2> ds) const override {
        for (std::size_t i = 0; i < classes_.size(); ++i) {
            const ClassParams& cp = classes_[i];
            const double inv2w2 = 1.0 / (2.0 * cp.width * cp.width);
            Vec2 g{0.0, 0.0};
            for (std::size_t c = 0; c < cp.centers.size(); ++c) {
                const Vec2 d = p - cp.centers[c];
                const double e = cp.weights[c] * std::exp(-dot(d, d) * inv2w2);
                g = g + (-2.0 * inv2w2 * e) * d;
            }
            ds[i] = g;
        }
    }

private:
    std::vector<ClassParams> classes_;
};

// score_i = bias_i + log sum_c w_c exp(-|p - c|^2 / T); with one center per class the
// argmax regions are exactly the (power-)Voronoi cells of the centers.
class SmoothedVoronoiField final : public ScoreField {
public:
    explicit SmoothedVoronoiField(const FieldSpec& spec)
        : ScoreField(spec.k, 1.0, spec.boundary), classes_(spec.classes), inv_t_(1.0 / spec.temperature) {
        for (auto& cp : classes_) {
            log_weights_.emplace_back();
            for (double w : cp.weights) log_weights_.back().push_back(std::log(w));
        }
    }

protected:
    void scores(Point2 p, std::span<double> s) const override {
        for (std::size_t i = 0; i < classes_.size(); ++i) {
            const ClassParams& cp = classes_[i];
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < cp.centers.size(); ++c) m = std::max(m, exponent(i, c, p));
            double total = 0.0;
            for (std::size_t c = 0; c < cp.centers.size(); ++c) total += std::exp(exponent(i, c, p) - m);
            s[i] = cp.bias + m + std::log(total);
        }
    }

    void score_gradients(Point2 p, std::span<Vec2> ds) const override {
        for (std::size_t i = 0; i < classes_.size(); ++i) {
            const ClassParams& cp = classes_[i];
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < cp.centers.size(); ++c) m = std::max(m, exponent(i, c, p));
            double total = 0.0;
            Vec2 g{0.0, 0.0};
            for (std::size_t c = 0; c < cp.centers.size(); ++c) {
                const double e = std::exp(exponent(i, c, p) - m);
                total += e;
                g = g + (-2.0 * inv_t_ * e) * (p - cp.centers[c]);
            }
            ds[i] = (1.0 / total) * g;
        }
    }

private:
    double exponent(std::size_t i, std::size_t c, Point2 p) const {
        const Vec2 d = p - classes_[i].centers[c];
        return log_weights_[i][c] - dot(d, d) * inv_t_;
    }

    std::vector<ClassParams> classes_;
    std::vector<std::vector<double>> log_weights_;
    double inv_t_;
};

// score_i = a_i x + b_i y + c_i, weights = [a, b, c].
class LinearPlanesField final : public ScoreField {
public:
    explicit LinearPlanesField(const FieldSpec& spec)
        : ScoreField(spec.k, 1.0 / spec.temperature, spec.boundary) {
        for (const auto& cp : spec.classes) coeffs_.push_back({cp.weights[0], cp.weights[1], cp.weights[2]});
    }

protected:
    void scores(Point2 p, std::span<double> s) const override {
        for (std::size_t i = 0; i < coeffs_.size(); ++i) s[i] = coeffs_[i][0] * p.x + coeffs_[i][1] * p.y + coeffs_[i][2];
    }

    void score_gradients(Point2, std::span<Vec2> ds) const override {
        for (std::size_t i = 0; i < coeffs_.size(); ++i) ds[i] = {coeffs_[i][0], coeffs_[i][1]};
    }

private:
    std::vector<std::array<double, 3>> coeffs_;
};

// Two classes alternating along x: h(x) = (-1)^n prod_j tanh(s (x - t_j) / 2),
// p_0 = (1 + h) / 2, p_1 = (1 - h) / 2. Class 0 lies left of the first transition.
class Sigmoid1DField final : public MultiClassField {
public:
    explicit Sigmoid1DField(const FieldSpec& spec)
        : transitions_(spec.transitions), half_s_(0.5 * spec.sharpness), boundary_(spec.boundary) {
        if (boundary_.kind == ReferenceBoundary::Kind::None) {
            boundary_.kind = ReferenceBoundary::Kind::VerticalLines;
            boundary_.xs = transitions_;
        }
        sign_ = transitions_.size() % 2 == 0 ? 1.0 : -1.0;
    }

    std::size_t class_count() const override { return 2; }

    void evaluate_into(Point2 p, std::span<double> out) const override {
        const double h = h_of(p.x);
        out[0] = 0.5 * (1.0 + h);
        out[1] = 0.5 * (1.0 - h);
    }

    std::optional<Vec2> analytic_gradient(Point2 p, ClassId c) const override {
        double dh = 0.0;
        for (std::size_t j = 0; j < transitions_.size(); ++j) {
            const double tj = std::tanh(half_s_ * (p.x - transitions_[j]));
            double term = half_s_ * (1.0 - tj * tj);
            for (std::size_t l = 0; l < transitions_.size(); ++l) {
                if (l != j) term *= std::tanh(half_s_ * (p.x - transitions_[l]));
            }
            dh += term;
        }
        dh *= sign_;
        return Vec2{c.index == 0 ? 0.5 * dh : -0.5 * dh, 0.0};
    }

    const ReferenceBoundary& reference_boundary() const override { return boundary_; }

private:
    double h_of(double x) const {
        double h = sign_;
        for (double t : transitions_) h *= std::tanh(half_s_ * (x - t));
        return h;
    }

    std::vector<double> transitions_;
    double half_s_;
    double sign_ = 1.0;
    ReferenceBoundary boundary_;
};

} // namespace

std::unique_ptr<MultiClassField> make_field(const FieldSpec& input) {
    FieldSpec spec = input;
    if (spec.kind == FieldKind::SoftmaxRbf || spec.kind == FieldKind::SmoothedVoronoi) {
        for (auto& cp : spec.classes) {
            if (cp.weights.empty()) cp.weights.assign(cp.centers.size(), 1.0);
        }
    }
    validate_field_spec(spec);
    switch (spec.kind) {
    case FieldKind::SoftmaxRbf: return std::make_unique<SoftmaxRbfField>(spec);
    case FieldKind::SmoothedVoronoi: return std::make_unique<SmoothedVoronoiField>(spec);
    case FieldKind::LinearPlanes: return std::make_unique<LinearPlanesField>(spec);
    case FieldKind::Sigmoid1D: return std::make_unique<Sigmoid1DField>(spec);
    }
    throw ValidationError("unknown field kind");
}

} // namespace mcbound
