#include "probenorm/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "probenorm/errors.hpp"

namespace probenorm {

namespace {

using Eigen::VectorXd;

VectorXd clip_to_box(VectorXd x, const VectorXd& lo, const VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

// Gradient with components pointing out of the box zeroed at active bounds;
// its norm is the stationarity measure for the constrained problem.
VectorXd projected_gradient(const VectorXd& x, const VectorXd& g, const VectorXd& lo,
                            const VectorXd& hi) {
    VectorXd pg = g;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] <= lo[i] && g[i] > 0.0) pg[i] = 0.0;
        if (x[i] >= hi[i] && g[i] < 0.0) pg[i] = 0.0;
    }
    return pg;
}

struct Pair {
    VectorXd s;
    VectorXd y;
    double rho;
};

// Standard two-loop recursion; returns H*g (an approximation of the Newton
// step direction before negation).
VectorXd two_loop(const std::deque<Pair>& mem, const VectorXd& g) {
    VectorXd q = g;
    std::vector<double> a(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
        a[i] = mem[i].rho * mem[i].s.dot(q);
        q -= a[i] * mem[i].y;
    }
    if (!mem.empty()) {
        const Pair& last = mem.back();
        q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
        const double b = mem[i].rho * mem[i].y.dot(q);
        q += (a[i] - b) * mem[i].s;
    }
    return q;
}

struct LinePoint {
    double alpha = 0.0;
    double f = 0.0;
    double df = 0.0;  // directional derivative
};

}  // namespace

LbfgsResult lbfgs_box_minimize(const ObjectiveFn& fn, const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                               const LbfgsOptions& options) {
    const Eigen::Index n = x0.size();
    if (lo.size() != n || hi.size() != n)
        throw InvalidInputError("lbfgs_box_minimize: bound dimensions do not match x0");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(lo[i] <= hi[i]))
            throw InvalidInputError("lbfgs_box_minimize: lower bound exceeds upper bound");

    VectorXd x = clip_to_box(x0, lo, hi);
    VectorXd g(n);
    double f = fn(x, g);
    if (!std::isfinite(f))
        throw NumericalError("lbfgs_box_minimize: objective not finite at the start point");

    std::deque<Pair> mem;
    LbfgsResult result;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter;
        const VectorXd pg = projected_gradient(x, g, lo, hi);
        if (pg.lpNorm<Eigen::Infinity>() < options.grad_tolerance) {
            result.converged = true;
            break;
        }

        VectorXd d = -two_loop(mem, g);
        // Freeze coordinates whose motion would leave the box immediately.
        for (Eigen::Index i = 0; i < n; ++i) {
            if (x[i] <= lo[i] && d[i] < 0.0) d[i] = 0.0;
            if (x[i] >= hi[i] && d[i] > 0.0) d[i] = 0.0;
        }
        double dg = d.dot(g);
        if (d.norm() == 0.0 || dg > -1e-14 * d.norm() * g.norm()) {
            mem.clear();
            d = -pg;
            dg = d.dot(g);
            if (d.norm() == 0.0) {
                result.converged = true;
                break;
            }
        }

        // Largest step that keeps every coordinate inside the box.
        double alpha_max = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d[i] > 0.0) alpha_max = std::min(alpha_max, (hi[i] - x[i]) / d[i]);
            if (d[i] < 0.0) alpha_max = std::min(alpha_max, (lo[i] - x[i]) / d[i]);
        }
        if (!(alpha_max > 0.0)) {
            result.converged = true;
            break;
        }

        VectorXd g_trial(n);
        const auto eval = [&](double a, LinePoint& p) {
            const VectorXd xt = clip_to_box(x + a * d, lo, hi);
            p.alpha = a;
            p.f = fn(xt, g_trial);
            p.df = std::isfinite(p.f) ? g_trial.dot(d)
                                      : std::numeric_limits<double>::infinity();
        };

        // Strong-Wolfe bracketing (Nocedal & Wright alg. 3.5) capped at the
        // box boundary; a boundary step only needs sufficient decrease.
        const double f0 = f;
        const double df0 = dg;
        LinePoint best{0.0, f0, df0};
        bool accepted = false;
        LinePoint prev{0.0, f0, df0};
        double a = std::min(1.0, alpha_max);
        LinePoint cur;
        LinePoint bracket_lo, bracket_hi;
        bool have_bracket = false;
        for (int ls = 0; ls < 20 && !accepted && !have_bracket; ++ls) {
            eval(a, cur);
            if (!std::isfinite(cur.f) || cur.f > f0 + options.c1 * a * df0 ||
                (ls > 0 && cur.f >= prev.f)) {
                bracket_lo = prev;
                bracket_hi = cur;
                have_bracket = true;
                break;
            }
            if (std::abs(cur.df) <= -options.c2 * df0) {
                best = cur;
                accepted = true;
                break;
            }
            if (cur.df >= 0.0) {
                bracket_lo = cur;
                bracket_hi = prev;
                have_bracket = true;
                break;
            }
            if (a >= alpha_max * (1.0 - 1e-12)) {
                // The box truncated the search; Armijo held, take the edge.
                best = cur;
                accepted = true;
                break;
            }
            prev = cur;
            a = std::min(2.0 * a, alpha_max);
        }
        if (have_bracket && !accepted) {
            for (int z = 0; z < 30; ++z) {
                const double mid = 0.5 * (bracket_lo.alpha + bracket_hi.alpha);
                eval(mid, cur);
                if (!std::isfinite(cur.f) || cur.f > f0 + options.c1 * mid * df0 ||
                    cur.f >= bracket_lo.f) {
                    bracket_hi = cur;
                } else {
                    if (std::abs(cur.df) <= -options.c2 * df0) {
                        best = cur;
                        accepted = true;
                        break;
                    }
                    if (cur.df * (bracket_hi.alpha - bracket_lo.alpha) >= 0.0)
                        bracket_hi = bracket_lo;
                    bracket_lo = cur;
                }
                if (std::abs(bracket_hi.alpha - bracket_lo.alpha) <
                    1e-14 * std::max(1.0, std::abs(bracket_lo.alpha))) {
                    break;
                }
            }
            if (!accepted && bracket_lo.alpha > 0.0 && bracket_lo.f < f0) {
                best = bracket_lo;  // sufficient decrease without curvature
                accepted = true;
            }
        }
        if (!accepted) {
            // Last resort: plain backtracking.
            a = std::min(1.0, alpha_max);
            for (int bt = 0; bt < 40; ++bt, a *= 0.5) {
                eval(a, cur);
                if (std::isfinite(cur.f) && cur.f < f0) {
                    best = cur;
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) break;  // no progress possible along d

        const VectorXd x_new = clip_to_box(x + best.alpha * d, lo, hi);
        VectorXd g_new(n);
        const double f_new = fn(x_new, g_new);
        const VectorXd s = x_new - x;
        const VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm()) {
            mem.push_back({s, y, 1.0 / sy});
            if (static_cast<int>(mem.size()) > options.memory) mem.pop_front();
        }
        x = x_new;
        f = f_new;
        g = g_new;
    }

    result.x = x;
    result.f = f;
    return result;
}

}  // namespace probenorm
