#pragma once

#include <span>

#include <Eigen/Core>

namespace probenorm {

// A force reading in the probe frame, newtons.  z is the probe axis
// component (compression positive), x/y are the transverse components.
struct ForceReading {
    double fx = 0.0;
    double fy = 0.0;
    double fz = 0.0;

    Eigen::Vector3d vec() const { return {fx, fy, fz}; }
};

struct ObjectiveConfig {
    double lambda = 0.3;   // weight of the norm regularizer in the denominator
    double epsilon = 1.0;  // additive denominator offset
};

double l2_norm(const ForceReading& f);

// Alignment score fz / (fx*fy + lambda*||f|| + epsilon): maximal when the
// axial component carries the whole contact force.  Throws
// DegenerateObjectiveError when the denominator magnitude falls below 1e-9
// and InvalidInputError on non-finite readings, negative lambda, or
// non-positive epsilon.
double objective(const ForceReading& f, const ObjectiveConfig& config);

struct NoiseRobustness {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n-1)
};

// Objective statistics across repeated readings of the same pose; used to
// compare denominator weightings.  Requires at least two samples.
NoiseRobustness objective_noise_robustness(std::span<const ForceReading> samples,
                                           const ObjectiveConfig& config);

}  // namespace probenorm
