#include "mcbound/junction.hpp"

#include "mcbound/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace mcbound {

const char* junction_method_name(JunctionResult::Method m) {
    return m == JunctionResult::Method::TangentPlane ? "tangent_plane" : "fallback";
}

JunctionProblem JunctionProblem::for_classes(const MultiClassField& field, std::array<ClassId, 3> classes,
                                             Rect bounds, double tolerance) {
    if (classes[0] == classes[1] || classes[1] == classes[2] || classes[0] == classes[2]) {
        throw InvalidInput("junction classes must be pairwise distinct");
    }
    JunctionProblem problem;
    problem.bounds = bounds;
    problem.step_tolerance = tolerance;
    problem.residual_tolerance = tolerance;
    const MultiClassField* f = &field;
    problem.channels = [f, classes](Point2 p) {
        const ProbabilityVector pv = f->evaluate(p);
        ChannelSample s;
        for (int i = 0; i < 3; ++i) {
            s.values[i] = pv[classes[i]];
            s.gradients[i] = f->gradient(p, classes[i]);
        }
        return s;
    };
    return problem;
}

double objective_G(const std::array<double, 3>& f) {
    const double d01 = f[0] - f[1];
    const double d02 = f[0] - f[2];
    const double d12 = f[1] - f[2];
    return d01 * d01 + d02 * d02 + d12 * d12;
}

double objective_G(const JunctionProblem& problem, Point2 p) { return objective_G(problem.channels(p).values); }

Point2 tangent_plane_step(const ChannelSample& s, Point2 p) {
    Eigen::Matrix3d A;
    Eigen::Vector3d rhs;
    for (int i = 0; i < 3; ++i) {
        const double a = s.gradients[i].x;
        const double b = s.gradients[i].y;
        A(i, 0) = a;
        A(i, 1) = b;
        A(i, 2) = -1.0;
        rhs(i) = a * p.x + b * p.y - s.values[i];
    }
    if (!A.allFinite() || !rhs.allFinite()) throw SingularStep("non-finite tangent planes");

    Eigen::ColPivHouseholderQR<Eigen::Matrix3d> qr(A);
    // scale the rank threshold to the gradient magnitudes, not the constant -1 column
    const double scale = std::max(1.0, A.leftCols<2>().cwiseAbs().maxCoeff());
    qr.setThreshold(1e-12 * scale);
    if (qr.rank() < 3) throw SingularStep("tangent planes do not meet in a single point");
    const Eigen::Vector3d sol = qr.solve(rhs);
    return {sol(0), sol(1)};
}

Point2 tangent_plane_step(const JunctionProblem& problem, Point2 p) {
    return tangent_plane_step(problem.channels(p), p);
}

MinimizeResult derivative_free_minimize(const std::function<double(Point2)>& objective, const Rect& bounds,
                                        const MinimizeOptions& options) {
    struct Vertex {
        Point2 p;
        double f;
    };
    int evals = 0;
    auto eval = [&](Point2 p) {
        p = bounds.clamp(p);
        ++evals;
        return Vertex{p, objective(p)};
    };

    const Point2 c = bounds.center();
    const double h = 0.25 * bounds.shorter_side();
    std::array<Vertex, 3> s{eval(c), eval({c.x + h, c.y}), eval({c.x, c.y + h})};
    auto order = [&] { std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; }); };
    order();

    while (evals < options.max_evaluations && s[0].f > options.target) {
        const double diameter = std::max({norm(s[1].p - s[0].p), norm(s[2].p - s[0].p), norm(s[2].p - s[1].p)});
        if (diameter <= options.x_tolerance) break;

        const Point2 centroid = 0.5 * (s[0].p + s[1].p);
        const Vertex r = eval(centroid + (centroid - s[2].p));
        if (r.f < s[0].f) {
            const Vertex e = eval(centroid + 2.0 * (centroid - s[2].p));
            s[2] = e.f < r.f ? e : r;
        } else if (r.f < s[1].f) {
            s[2] = r;
        } else {
            bool shrink = false;
            if (r.f < s[2].f) {
                const Vertex oc = eval(centroid + 0.5 * (r.p - centroid));
                if (oc.f <= r.f) {
                    s[2] = oc;
                } else {
                    shrink = true;
                }
            } else {
                const Vertex ic = eval(centroid + 0.5 * (s[2].p - centroid));
                if (ic.f < s[2].f) {
                    s[2] = ic;
                } else {
                    shrink = true;
                }
            }
            if (shrink) {
                s[1] = eval(s[0].p + 0.5 * (s[1].p - s[0].p));
                s[2] = eval(s[0].p + 0.5 * (s[2].p - s[0].p));
            }
        }
        order();
    }
    return {s[0].p, s[0].f, evals};
}

JunctionResult find_triple_junction(const JunctionProblem& problem) {
    if (!problem.bounds.valid()) throw InvalidInput("junction bounds must be a valid rectangle");
    JunctionResult result;

    Point2 p = problem.bounds.center();
    bool converged = false;
    try {
        for (int it = 0; it < problem.max_iterations; ++it) {
            const Point2 next = tangent_plane_step(problem, p);
            result.iterations = it + 1;
            const double step = norm(next - p);
            p = next;
            if (!is_finite(p)) break;
            if (step < problem.step_tolerance) {
                converged = true;
                break;
            }
        }
    } catch (const SingularStep&) {
        converged = false;
    }

    if (converged && problem.bounds.contains(p)) {
        const double g = objective_G(problem, p);
        if (g < problem.residual_tolerance) {
            result.point = p;
            result.residual = g;
            result.method = JunctionResult::Method::TangentPlane;
            return result;
        }
    }

    result.fallback_invoked = true;
    MinimizeOptions opts;
    opts.x_tolerance = problem.step_tolerance;
    opts.max_evaluations = problem.max_evaluations;
    opts.target = 0.0;
    const MinimizeResult m =
        derivative_free_minimize([&](Point2 q) { return objective_G(problem, q); }, problem.bounds, opts);
    if (m.value < problem.residual_tolerance && problem.bounds.contains(m.point)) {
        result.point = m.point;
        result.residual = m.value;
        result.method = JunctionResult::Method::Fallback;
        return result;
    }
    throw JunctionNotFound("no triple junction with G < " + std::to_string(problem.residual_tolerance) +
                           " inside the rectangle (best G " + std::to_string(m.value) + ")");
}

} // namespace mcbound
