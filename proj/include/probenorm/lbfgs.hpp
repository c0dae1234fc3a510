#pragma once

#include <functional>

#include <Eigen/Core>

namespace probenorm {

struct LbfgsOptions {
    int memory = 10;
    int max_iterations = 200;
    double grad_tolerance = 1e-6;  // infinity norm of the projected gradient
    double c1 = 1e-4;              // Armijo (sufficient decrease) constant
    double c2 = 0.9;               // strong-Wolfe curvature constant
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Evaluates the objective at x and fills grad; both must stay finite inside
// the box for convergence, but +inf returns are tolerated (the line search
// backs away from them).
using ObjectiveFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Minimizes fn subject to lo <= x <= hi with limited-memory BFGS.
// Search directions are projected onto the active box constraints and steps
// are clipped at the first bound crossing; the line search enforces strong
// Wolfe conditions when the step stays interior and falls back to plain
// sufficient decrease when it is truncated by the box.
LbfgsResult lbfgs_box_minimize(const ObjectiveFn& fn, const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                               const LbfgsOptions& options = {});

}  // namespace probenorm
