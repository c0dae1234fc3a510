#pragma once

#include <cstdint>
#include <vector>

#include "probenorm/gp.hpp"
#include "probenorm/pose.hpp"

namespace probenorm {

// One search dimension: which rotation coordinate it drives and its bounds.
struct SearchAxis {
    enum class Kind { OutPlane, InPlane };
    Kind kind = Kind::OutPlane;
    double lower_deg = 0.0;
    double upper_deg = 0.0;
};

// Rectangular search domain over one or two rotation axes.  The contact
// point is fixed per run and is not part of the domain.
struct SearchSpace {
    std::vector<SearchAxis> axes;

    // Throws InvalidInputError unless there are 1 or 2 axes with distinct
    // kinds, each with finite lower < upper inside [-90, 90].
    void validate() const;

    double max_width_deg() const;
    bool contains(const ProbePose& p) const;
};

struct AcquisitionConfig {
    double xi = 0.45;  // exploration offset, in the (standardized) value units
                       // of the model being searched
    int grid_density = 0;    // points per axis; 0 = auto (256 for 1-D, 64 for 2-D)
    int refine_steps = 20;   // local refinement iterations around the best cell
    bool printed_variance_ei = false;  // variance (not stddev) on the phi term
};

// Expected improvement of a posterior over the incumbent best value f_best.
// Zero posterior deviation yields exactly zero.  xi shifts the improvement
// threshold toward exploration.
double expected_improvement(const PosteriorEstimate& post, double f_best, double xi);

// Variant with sigma^2*phi(Z) as the second term (kept for comparison runs;
// behavior is selected through AcquisitionConfig::printed_variance_ei).
double expected_improvement_variance_form(const PosteriorEstimate& post, double f_best,
                                          double xi);

struct AcquisitionResult {
    ProbePose pose;
    double ei = 0.0;
    std::int64_t evaluations = 0;  // posterior evaluations spent in the search
};

// Deterministic maximizer: dense grid over the space (ties broken toward the
// lowest grid index) followed by per-axis golden-section refinement inside
// the winning cell.  The model must be fitted; the returned pose inherits
// the training contact point.
AcquisitionResult maximize_acquisition(const GpModel& model, const SearchSpace& space,
                                       double f_best, const AcquisitionConfig& config);

}  // namespace probenorm
