#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "probenorm/acquisition.hpp"
#include "probenorm/contact.hpp"
#include "probenorm/gp.hpp"
#include "probenorm/objective.hpp"

namespace probenorm {

struct BORunConfig {
    SearchSpace space;
    ObjectiveConfig objective;
    AcquisitionConfig acquisition;
    ContactModelConfig contact;
    Eigen::Vector3d contact_point = Eigen::Vector3d::Zero();
    int n_init = 3;                    // random poses before the surrogate loop
    int n_max = 50;                    // total probe evaluations
    int min_iters_before_stop = 10;    // evaluations before EI stopping is live
    double ei_stop_rel = 1e-6;         // threshold relative to the value range
    int refit_restarts = 2;            // random restarts per hyperparameter refit
    int consecutive_failure_cap = 10;  // failed probes in a row before giving up
    bool best_by_posterior_mean = false;
    std::uint64_t seed = 0;

    void validate() const;
};

struct HistoryEntry {
    ProbePose pose;
    ForceReading force;
    double objective_value = 0.0;
    double ei = 0.0;  // EI (objective units) that selected this pose; 0 for init
    bool ok = false;
    std::string error;  // failure reason when !ok
};

enum class StopReason {
    MaxEvaluations,
    EiConverged,
    DegenerateRun,     // too many failed probes in a row, or surrogate collapse
    AllInitialFailed,
};

struct RunResult {
    std::vector<HistoryEntry> history;
    ProbePose best_pose;
    double best_objective = 0.0;
    // alignment_error_deg(best_pose, surface, cfg.space); NaN when !ok.
    double angular_error_deg = 0.0;
    int n_evaluations = 0;                   // probe evaluations, incl. failed
    std::int64_t acquisition_evaluations = 0;  // posterior evals inside EI search
    StopReason stop = StopReason::MaxEvaluations;
    Hyperparams final_hyper;
    bool ok = false;  // false only when no pose could be evaluated at all
};

const char* stop_reason_name(StopReason r);

// One optimization run: n_init random poses, then GP refit / EI argmax /
// probe until n_max evaluations or EI collapses below ei_stop_rel times the
// observed value range (checked only after min_iters_before_stop).  Values
// are standardized before GP fitting; degenerate probes are recorded and
// excluded from the surrogate.
RunResult run_bo(const ContactSurface& surface, const BORunConfig& cfg);

// Alignment score of a pose: for a two-axis space, the 3-D angle between the
// probe axis and the true normal; for a single-axis space, the deviation of
// the optimized rotation from the angle that best aligns it (the other
// rotation held at zero), which is how per-rotation errors are reported.
double alignment_error_deg(const ProbePose& pose, const ContactSurface& surface,
                           const SearchSpace& space);

// One grid cell of a benchmark: a surface (or one per repeat, e.g. re-seeded
// rough fields) plus the run configuration; the per-repeat seed is derived
// from the batch master seed.
struct BatchCell {
    std::string label;
    std::vector<std::shared_ptr<const ContactSurface>> surfaces;  // 1 or repeats
    BORunConfig config;
};

struct RunOutcome {
    bool ok = false;
    RunResult result;
    std::string error;
};

struct CellSummary {
    std::string label;
    int repeats = 0;
    int failures = 0;
    double mean_error_deg = 0.0;
    double stddev_error_deg = 0.0;  // sample formula, 0 when repeats < 2
    double mean_evaluations = 0.0;
    bool partial = false;
};

struct BatchResult {
    std::vector<std::vector<RunOutcome>> runs;  // [cell][repeat]
    std::vector<CellSummary> summary;
};

// Runs cells x repeats with seeds derive_seed(master_seed, cell, repeat),
// fanned out over `jobs` threads (0 = hardware concurrency).  Results and
// summaries are identical regardless of the thread count.
BatchResult run_batch(const std::vector<BatchCell>& cells, int repeats,
                      std::uint64_t master_seed, int jobs);

}  // namespace probenorm
