#include "probenorm/bo.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "probenorm/errors.hpp"

namespace probenorm {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct Standardized {
    double mean = 0.0;
    double scale = 1.0;  // 1 when the values have no spread
    std::vector<double> values;
};

Standardized standardize(const std::vector<double>& raw) {
    Standardized out;
    double sum = 0.0;
    for (double v : raw) sum += v;
    out.mean = sum / static_cast<double>(raw.size());
    double ss = 0.0;
    for (double v : raw) ss += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(raw.size()));
    out.scale = sd > 1e-12 ? sd : 1.0;
    out.values.reserve(raw.size());
    for (double v : raw) out.values.push_back((v - out.mean) / out.scale);
    return out;
}

// Seeded Latin-hypercube initial design: per axis, the window splits into n
// strata, the strata are shuffled, and each pose draws uniformly inside its
// stratum.  Every pose is marginally uniform over the space, but the set
// cannot collapse into one corner — an all-clustered start leaves the first
// hyperparameter fits with no evidence of structure, and the resulting
// everything-is-noise posterior re-samples the cluster indefinitely.
std::vector<ProbePose> initial_poses(const SearchSpace& space, int n,
                                     const Eigen::Vector3d& contact, Rng& rng) {
    const std::size_t dims = space.axes.size();
    std::array<std::vector<int>, 2> strata;
    for (std::size_t a = 0; a < dims; ++a) {
        strata[a].resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) strata[a][static_cast<std::size_t>(i)] = i;
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.uniform() * (i + 1));
            std::swap(strata[a][static_cast<std::size_t>(i)],
                      strata[a][static_cast<std::size_t>(j)]);
        }
    }
    std::vector<ProbePose> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ProbePose p;
        p.contact_point = contact;
        for (std::size_t a = 0; a < dims; ++a) {
            const SearchAxis& ax = space.axes[a];
            const double stratum_width = (ax.upper_deg - ax.lower_deg) / n;
            const double v = ax.lower_deg +
                             (strata[a][static_cast<std::size_t>(i)] + rng.uniform()) *
                                 stratum_width;
            if (ax.kind == SearchAxis::Kind::OutPlane)
                p.out_plane_deg = v;
            else
                p.in_plane_deg = v;
        }
        out.push_back(p);
    }
    return out;
}

// Posterior-mean argmax over the space, reusing the acquisition grid search
// by treating the mean as the score (variance forced to zero).
ProbePose posterior_mean_argmax(const GpModel& model, const SearchSpace& space,
                                const AcquisitionConfig& acq) {
    const int grid = acq.grid_density != 0 ? acq.grid_density
                     : space.axes.size() == 1 ? 256
                                              : 64;
    ProbePose best;
    best.contact_point = model.train_poses().front().contact_point;
    double best_mean = -std::numeric_limits<double>::infinity();
    const std::size_t dims = space.axes.size();
    const int rows = static_cast<int>(dims == 2 ? grid : 1);
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < rows; ++j) {
            ProbePose p = best;
            const auto set_axis = [&](std::size_t a, int idx) {
                const SearchAxis& ax = space.axes[a];
                const double v =
                    ax.lower_deg + (ax.upper_deg - ax.lower_deg) * idx / (grid - 1);
                if (ax.kind == SearchAxis::Kind::OutPlane)
                    p.out_plane_deg = v;
                else
                    p.in_plane_deg = v;
            };
            set_axis(0, i);
            if (dims == 2) set_axis(1, j);
            const double mean = model.predict(p).mean;
            if (mean > best_mean) {
                best_mean = mean;
                best = p;
            }
        }
    }
    return best;
}

}  // namespace

void BORunConfig::validate() const {
    space.validate();
    if (n_init < 1) throw InvalidInputError("BORunConfig: n_init must be >= 1");
    if (n_max <= n_init) throw InvalidInputError("BORunConfig: n_max must exceed n_init");
    if (ei_stop_rel < 0.0 || !std::isfinite(ei_stop_rel))
        throw InvalidInputError("BORunConfig: ei_stop_rel must be >= 0");
    if (min_iters_before_stop < 0)
        throw InvalidInputError("BORunConfig: min_iters_before_stop must be >= 0");
    if (refit_restarts < 0)
        throw InvalidInputError("BORunConfig: refit_restarts must be >= 0");
    if (consecutive_failure_cap < 1)
        throw InvalidInputError("BORunConfig: consecutive_failure_cap must be >= 1");
    if (!contact_point.allFinite())
        throw InvalidInputError("BORunConfig: non-finite contact point");
}

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::MaxEvaluations: return "max-evaluations";
        case StopReason::EiConverged: return "ei-converged";
        case StopReason::DegenerateRun: return "degenerate-run";
        case StopReason::AllInitialFailed: return "all-initial-failed";
    }
    return "unknown";
}

RunResult run_bo(const ContactSurface& surface, const BORunConfig& cfg) {
    cfg.validate();
    RunResult result;
    result.best_objective = kNan;
    result.angular_error_deg = kNan;

    Rng pose_rng(derive_seed(cfg.seed, 0, surface.rng_seed()));
    Rng noise_stream(derive_seed(cfg.seed, 1, surface.rng_seed()));
    Rng hyper_rng(derive_seed(cfg.seed, 2, surface.rng_seed()));

    std::vector<ProbePose> gp_poses;
    std::vector<double> gp_values;

    const auto evaluate = [&](const ProbePose& pose, double selection_ei) {
        HistoryEntry entry;
        entry.pose = pose;
        entry.ei = selection_ei;
        try {
            entry.force = sense_force(pose, surface, cfg.contact, noise_stream);
            entry.objective_value = objective(entry.force, cfg.objective);
            entry.ok = true;
            gp_poses.push_back(pose);
            gp_values.push_back(entry.objective_value);
        } catch (const NoContactError& e) {
            entry.objective_value = kNan;
            entry.error = e.what();
        } catch (const DegenerateObjectiveError& e) {
            entry.objective_value = kNan;
            entry.error = e.what();
        }
        result.history.push_back(entry);
        return entry.ok;
    };

    for (const ProbePose& p : initial_poses(cfg.space, cfg.n_init, cfg.contact_point,
                                            pose_rng))
        evaluate(p, 0.0);
    if (gp_values.empty()) {
        result.stop = StopReason::AllInitialFailed;
        result.n_evaluations = static_cast<int>(result.history.size());
        return result;
    }

    const HyperBounds bounds = HyperBounds::for_domain_width(cfg.space.max_width_deg());
    Hyperparams hyper{1.0, 0.01, cfg.space.max_width_deg() / 4.0};
    bool have_hyper = false;
    int consecutive_failures = 0;
    result.stop = StopReason::MaxEvaluations;

    while (static_cast<int>(result.history.size()) < cfg.n_max) {
        const Standardized std_values = standardize(gp_values);

        try {
            if (gp_values.size() >= 2) {
                const HyperFitResult fit =
                    fit_hyperparams(gp_poses, std_values.values, bounds,
                                    cfg.refit_restarts, hyper_rng,
                                    have_hyper ? &hyper : nullptr);
                hyper = fit.hyper;
                have_hyper = true;
            }
            const GpModel model = gp_fit(gp_poses, std_values.values, hyper);

            double f_best_std = -std::numeric_limits<double>::infinity();
            for (double v : std_values.values) f_best_std = std::max(f_best_std, v);

            const AcquisitionResult acq =
                maximize_acquisition(model, cfg.space, f_best_std, cfg.acquisition);
            result.acquisition_evaluations += acq.evaluations;

            const double ei_raw = acq.ei * std_values.scale;
            const auto [lo, hi] = std::minmax_element(gp_values.begin(), gp_values.end());
            const double range = *hi - *lo;
            if (static_cast<int>(result.history.size()) >= cfg.min_iters_before_stop &&
                ei_raw < cfg.ei_stop_rel * range) {
                result.stop = StopReason::EiConverged;
                break;
            }

            ProbePose next = acq.pose;
            next.contact_point = cfg.contact_point;
            if (evaluate(next, ei_raw)) {
                consecutive_failures = 0;
            } else if (++consecutive_failures >= cfg.consecutive_failure_cap) {
                result.stop = StopReason::DegenerateRun;
                break;
            }
        } catch (const NumericalError&) {
            // Surrogate collapse (e.g. duplicated poses at the noise floor):
            // keep the best found so far rather than aborting the run.
            result.stop = StopReason::DegenerateRun;
            break;
        }
    }

    result.n_evaluations = static_cast<int>(result.history.size());

    // Best = argmax of observed objective (earliest on ties); optionally the
    // posterior-mean argmax over the space for comparison studies.
    std::size_t best_idx = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gp_values.size(); ++i) {
        if (gp_values[i] > best_val) {
            best_val = gp_values[i];
            best_idx = i;
        }
    }
    result.best_pose = gp_poses[best_idx];
    result.best_objective = best_val;
    if (cfg.best_by_posterior_mean && gp_values.size() >= 2) {
        try {
            const Standardized std_values = standardize(gp_values);
            const GpModel model = gp_fit(gp_poses, std_values.values, hyper);
            result.best_pose = posterior_mean_argmax(model, cfg.space, cfg.acquisition);
            result.best_objective =
                model.predict(result.best_pose).mean * std_values.scale + std_values.mean;
        } catch (const NumericalError&) {
            // fall back to the observed best
        }
    }
    result.angular_error_deg = alignment_error_deg(result.best_pose, surface, cfg.space);
    result.ok = true;
    result.final_hyper = hyper;
    return result;
}

double alignment_error_deg(const ProbePose& pose, const ContactSurface& surface,
                           const SearchSpace& space) {
    if (space.axes.size() != 1) return angular_error(pose, surface);
    // Single-axis run: score only the optimized rotation, against the angle
    // that best aligns the axis with the true normal while the other
    // rotation stays at zero.  This mirrors how per-rotation results are
    // reported and keeps the unreachable cross-axis residual out of the
    // score.
    const Eigen::Vector3d n = surface.true_normal(pose.contact_point);
    constexpr double kRadToDeg = 180.0 / M_PI;
    if (space.axes.front().kind == SearchAxis::Kind::OutPlane) {
        const double target = std::atan2(-n.y(), n.z()) * kRadToDeg;
        return std::abs(pose.out_plane_deg - target);
    }
    const double target = std::atan2(n.x(), n.z()) * kRadToDeg;
    return std::abs(pose.in_plane_deg - target);
}

BatchResult run_batch(const std::vector<BatchCell>& cells, int repeats,
                      std::uint64_t master_seed, int jobs) {
    if (cells.empty()) throw InvalidInputError("run_batch: no cells");
    if (repeats < 1) throw InvalidInputError("run_batch: repeats must be >= 1");
    for (const BatchCell& cell : cells) {
        if (cell.surfaces.empty() ||
            (cell.surfaces.size() != 1 &&
             cell.surfaces.size() != static_cast<std::size_t>(repeats)))
            throw InvalidInputError("run_batch: cell needs 1 or `repeats` surfaces");
    }
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;

    BatchResult out;
    out.runs.assign(cells.size(), std::vector<RunOutcome>(repeats));

    const int total = static_cast<int>(cells.size()) * repeats;
    std::atomic<int> next{0};
    const auto worker = [&]() {
        while (true) {
            const int task = next.fetch_add(1);
            if (task >= total) break;
            const int cell_idx = task / repeats;
            const int rep = task % repeats;
            const BatchCell& cell = cells[cell_idx];
            const ContactSurface& surface =
                cell.surfaces.size() == 1 ? *cell.surfaces[0] : *cell.surfaces[rep];
            BORunConfig cfg = cell.config;
            cfg.seed = derive_seed(master_seed, cell_idx, rep);
            RunOutcome& slot = out.runs[cell_idx][rep];
            try {
                slot.result = run_bo(surface, cfg);
                slot.ok = slot.result.ok;
                if (!slot.ok) slot.error = stop_reason_name(slot.result.stop);
            } catch (const std::exception& e) {
                slot.ok = false;
                slot.error = e.what();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // Deterministic reduction in (cell, repeat) order.
    for (std::size_t c = 0; c < cells.size(); ++c) {
        CellSummary s;
        s.label = cells[c].label;
        s.repeats = repeats;
        double sum = 0.0, sum_evals = 0.0;
        std::vector<double> errors;
        for (const RunOutcome& run : out.runs[c]) {
            if (!run.ok) {
                ++s.failures;
                continue;
            }
            errors.push_back(run.result.angular_error_deg);
            sum += run.result.angular_error_deg;
            sum_evals += run.result.n_evaluations;
        }
        s.partial = s.failures > 0;
        if (!errors.empty()) {
            s.mean_error_deg = sum / static_cast<double>(errors.size());
            s.mean_evaluations = sum_evals / static_cast<double>(errors.size());
            if (errors.size() >= 2) {
                double ss = 0.0;
                for (double e : errors)
                    ss += (e - s.mean_error_deg) * (e - s.mean_error_deg);
                s.stddev_error_deg =
                    std::sqrt(ss / static_cast<double>(errors.size() - 1));
            }
        } else {
            s.mean_error_deg = kNan;
            s.stddev_error_deg = kNan;
            s.mean_evaluations = kNan;
        }
        out.summary.push_back(s);
    }
    return out;
}

}  // namespace probenorm
