#pragma once

#include "mcbound/field.hpp"
#include "mcbound/types.hpp"

#include <array>
#include <functional>
#include <limits>

namespace mcbound {

/// Three channels and their gradients at a point.
struct ChannelSample {
    std::array<double, 3> values{};
    std::array<Vec2, 3> gradients{};
};

/// Triple-junction search inside `bounds`. Step and residual tolerances are kept
/// separate: one is a length, the other a squared probability.
struct JunctionProblem {
    std::function<ChannelSample(Point2)> channels;
    Rect bounds;
    double step_tolerance = 1e-12;
    double residual_tolerance = 1e-12;
    int max_iterations = 50;
    int max_evaluations = 500;

    static JunctionProblem for_classes(const MultiClassField& field, std::array<ClassId, 3> classes, Rect bounds,
                                       double tolerance);
};

struct JunctionResult {
    enum class Method { TangentPlane, Fallback };

    Point2 point;
    Method method = Method::TangentPlane;
    double residual = 0.0;
    int iterations = 0;
    bool fallback_invoked = false;
};

const char* junction_method_name(JunctionResult::Method m);

/// G = sum over i<j of (f_i - f_j)^2.
double objective_G(const std::array<double, 3>& f);
double objective_G(const JunctionProblem& problem, Point2 p);

/// Solves a_i X + b_i Y - Z = a_i x + b_i y - z_i (i = 1..3) by least squares.
/// Throws SingularStep when the system is rank deficient.
Point2 tangent_plane_step(const ChannelSample& s, Point2 p);
Point2 tangent_plane_step(const JunctionProblem& problem, Point2 p);

/// Tangent-plane iteration from the rectangle center, then Nelder-Mead on G.
/// Throws JunctionNotFound if neither stage is accepted.
JunctionResult find_triple_junction(const JunctionProblem& problem);

struct MinimizeOptions {
    double x_tolerance = 1e-12;
    int max_evaluations = 500;
    /// Stop as soon as the objective drops below this.
    double target = -std::numeric_limits<double>::infinity();
};

struct MinimizeResult {
    Point2 point;
    double value = 0.0;
    int evaluations = 0;
};

/// Nelder-Mead (1, 2, 0.5, 0.5) from the center of `bounds`, initial simplex scale
/// 0.25 * shorter side, every vertex projected into bounds.
MinimizeResult derivative_free_minimize(const std::function<double(Point2)>& objective, const Rect& bounds,
                                        const MinimizeOptions& options = {});

} // namespace mcbound
