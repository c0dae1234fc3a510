#include "probenorm/acquisition.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "probenorm/errors.hpp"

namespace probenorm {

namespace {

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double ei_impl(const PosteriorEstimate& post, double f_best, double xi, bool variance_form) {
    if (!std::isfinite(post.mean) || !std::isfinite(post.variance) || post.variance < 0.0)
        throw InvalidInputError("expected_improvement: invalid posterior");
    if (!std::isfinite(f_best) || !std::isfinite(xi))
        throw InvalidInputError("expected_improvement: non-finite f_best or xi");
    const double sigma = std::sqrt(post.variance);
    const double delta = post.mean - f_best - xi;
    if (sigma == 0.0) return 0.0;
    const double z = delta / sigma;
    const double spread = variance_form ? post.variance : sigma;
    return delta * normal_cdf(z) + spread * normal_pdf(z);
}

}  // namespace

void SearchSpace::validate() const {
    if (axes.empty() || axes.size() > 2)
        throw InvalidInputError("SearchSpace: expected 1 or 2 axes");
    if (axes.size() == 2 && axes[0].kind == axes[1].kind)
        throw InvalidInputError("SearchSpace: duplicate axis kind");
    for (const SearchAxis& ax : axes) {
        if (!std::isfinite(ax.lower_deg) || !std::isfinite(ax.upper_deg))
            throw InvalidInputError("SearchSpace: non-finite axis bound");
        if (!(ax.lower_deg < ax.upper_deg))
            throw InvalidInputError("SearchSpace: axis lower bound must be below upper");
        if (ax.lower_deg < -90.0 || ax.upper_deg > 90.0)
            throw InvalidInputError("SearchSpace: axis bounds outside [-90, 90]");
    }
}

double SearchSpace::max_width_deg() const {
    double w = 0.0;
    for (const SearchAxis& ax : axes) w = std::max(w, ax.upper_deg - ax.lower_deg);
    return w;
}

bool SearchSpace::contains(const ProbePose& p) const {
    for (const SearchAxis& ax : axes) {
        const double v = ax.kind == SearchAxis::Kind::OutPlane ? p.out_plane_deg
                                                               : p.in_plane_deg;
        if (v < ax.lower_deg || v > ax.upper_deg) return false;
    }
    return true;
}

double expected_improvement(const PosteriorEstimate& post, double f_best, double xi) {
    return ei_impl(post, f_best, xi, false);
}

double expected_improvement_variance_form(const PosteriorEstimate& post, double f_best,
                                          double xi) {
    return ei_impl(post, f_best, xi, true);
}

AcquisitionResult maximize_acquisition(const GpModel& model, const SearchSpace& space,
                                       double f_best, const AcquisitionConfig& config) {
    space.validate();
    if (model.size() == 0)
        throw InvalidInputError("maximize_acquisition: model is not fitted");
    if (config.grid_density != 0 && config.grid_density < 16)
        throw InvalidInputError("maximize_acquisition: grid_density must be 0 or >= 16");
    if (config.refine_steps < 0)
        throw InvalidInputError("maximize_acquisition: negative refine_steps");

    const std::size_t dims = space.axes.size();
    const int grid = config.grid_density != 0 ? config.grid_density
                     : dims == 1              ? 256
                                              : 64;

    std::int64_t evals = 0;
    const auto ei_at = [&](const std::array<double, 2>& coords) {
        ProbePose p;
        p.contact_point = model.train_poses().front().contact_point;
        for (std::size_t a = 0; a < dims; ++a) {
            if (space.axes[a].kind == SearchAxis::Kind::OutPlane)
                p.out_plane_deg = coords[a];
            else
                p.in_plane_deg = coords[a];
        }
        ++evals;
        const PosteriorEstimate post = model.predict(p);
        return config.printed_variance_ei
                   ? expected_improvement_variance_form(post, f_best, config.xi)
                   : expected_improvement(post, f_best, config.xi);
    };

    // Inclusive uniform grid; the flat index runs row-major over the axes and
    // strict comparison keeps the lowest index on ties.
    std::array<double, 2> step{0.0, 0.0};
    for (std::size_t a = 0; a < dims; ++a)
        step[a] = (space.axes[a].upper_deg - space.axes[a].lower_deg) / (grid - 1);

    std::array<double, 2> best_coords{0.0, 0.0};
    double best_ei = -std::numeric_limits<double>::infinity();
    const int rows = static_cast<int>(dims == 2 ? grid : 1);
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < rows; ++j) {
            std::array<double, 2> c{space.axes[0].lower_deg + step[0] * i, 0.0};
            if (dims == 2) c[1] = space.axes[1].lower_deg + step[1] * j;
            const double e = ei_at(c);
            if (e > best_ei) {
                best_ei = e;
                best_coords = c;
            }
        }
    }

    // Golden-section sweeps, one axis at a time, inside +-1 grid cell of the
    // winner; only strictly better points move the incumbent.
    constexpr double kInvPhi = 0.6180339887498949;
    std::array<std::array<double, 2>, 2> window;  // per axis: {lo, hi}
    for (std::size_t a = 0; a < dims; ++a) {
        window[a][0] = std::max(space.axes[a].lower_deg, best_coords[a] - step[a]);
        window[a][1] = std::min(space.axes[a].upper_deg, best_coords[a] + step[a]);
    }
    for (int it = 0; it < config.refine_steps; ++it) {
        for (std::size_t a = 0; a < dims; ++a) {
            const double lo = window[a][0];
            const double hi = window[a][1];
            const double m1 = hi - (hi - lo) * kInvPhi;
            const double m2 = lo + (hi - lo) * kInvPhi;
            std::array<double, 2> c1 = best_coords;
            std::array<double, 2> c2 = best_coords;
            c1[a] = m1;
            c2[a] = m2;
            const double e1 = ei_at(c1);
            const double e2 = ei_at(c2);
            if (e1 >= e2) {
                window[a][1] = m2;
                if (e1 > best_ei) {
                    best_ei = e1;
                    best_coords = c1;
                }
            } else {
                window[a][0] = m1;
                if (e2 > best_ei) {
                    best_ei = e2;
                    best_coords = c2;
                }
            }
        }
    }

    AcquisitionResult out;
    out.pose.contact_point = model.train_poses().front().contact_point;
    for (std::size_t a = 0; a < dims; ++a) {
        if (space.axes[a].kind == SearchAxis::Kind::OutPlane)
            out.pose.out_plane_deg = best_coords[a];
        else
            out.pose.in_plane_deg = best_coords[a];
    }
    out.ei = best_ei;
    out.evaluations = evals;
    return out;
}

}  // namespace probenorm
