#pragma once

#include "mcbound/types.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mcbound {

/// Class probabilities at one point; k >= 2 entries summing to one.
class ProbabilityVector {
public:
    ProbabilityVector() = default;
    explicit ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double operator[](ClassId c) const { return values_[c.index]; }
    std::span<const double> values() const { return values_; }

    /// min{ i : p_i = max_j p_j }
    ClassId argmax() const;
    /// (first, second) by descending probability, ties to the smaller index.
    std::pair<ClassId, ClassId> top_two() const;

private:
    std::vector<double> values_;
};

ClassId argmax_of(std::span<const double> p);
std::pair<ClassId, ClassId> top_two_of(std::span<const double> p);

/// Closed-form reference boundary of a synthetic field, used by the geometric oracles.
struct ReferenceBoundary {
    enum class Kind { None, Circle, VerticalLines };
    Kind kind = Kind::None;
    Point2 center;
    double radius = 0.0;
    std::vector<double> xs;

    /// Unsigned distance from p to the boundary.
    double distance(Point2 p) const;
    /// n points on the boundary restricted to `bounds` (lines), or spread around the circle.
    std::vector<Point2> sample(std::size_t n, const Rect& bounds) const;
};

/// Multi-class implicit field over the plane. Immutable; all queries are pure.
class MultiClassField {
public:
    virtual ~MultiClassField() = default;

    virtual std::size_t class_count() const = 0;

    /// Writes the k probabilities at p into out (out.size() == class_count()). No validation.
    virtual void evaluate_into(Point2 p, std::span<double> out) const = 0;

    /// Analytic gradient of p_c, if the field provides one.
    virtual std::optional<Vec2> analytic_gradient(Point2 p, ClassId c) const;

    virtual const ReferenceBoundary& reference_boundary() const;

    /// Throws InvalidInput on non-finite coordinates.
    ProbabilityVector evaluate(Point2 p) const;
    ClassId classify(Point2 p) const;
    std::pair<ClassId, ClassId> top_two(Point2 p) const;

    /// Analytic gradient when available, otherwise a central difference with
    /// step 1e-5 * max(1, |p|). Throws NumericalFailure on a non-finite result.
    Vec2 gradient(Point2 p, ClassId c) const;
    Vec2 finite_difference_gradient(Point2 p, ClassId c) const;

protected:
    void check_point(Point2 p) const;
};

enum class FieldKind { SoftmaxRbf, SmoothedVoronoi, LinearPlanes, Sigmoid1D };

const char* field_kind_name(FieldKind kind);
std::optional<FieldKind> field_kind_from_name(const std::string& name);

struct ClassParams {
    std::vector<Point2> centers;
    std::vector<double> weights;
    double width = 1.0;
    double bias = 0.0;
};

/// Validated description of a synthetic field. See docs/field-spec.md for the JSON layout.
struct FieldSpec {
    FieldKind kind = FieldKind::SoftmaxRbf;
    std::size_t k = 2;
    double temperature = 1.0;
    std::vector<ClassParams> classes;
    // sigmoid_1d only
    std::vector<double> transitions;
    double sharpness = 10.0;
    ReferenceBoundary boundary;
};

/// Parses and validates the JSON field-spec format.
/// Throws ParseError (with the JSON path) for schema violations, ValidationError for k < 2.
FieldSpec parse_field_spec(std::string_view text);
std::string field_spec_to_json(const FieldSpec& spec);

/// Throws ValidationError if the parameters are malformed for the kind.
void validate_field_spec(const FieldSpec& spec);

std::unique_ptr<MultiClassField> make_field(const FieldSpec& spec);

/// Deterministic random spec for the given kind; same seed, same spec.
FieldSpec generate_field_spec(FieldKind kind, std::size_t k, std::uint64_t seed);

} // namespace mcbound
