#pragma once

#include <Eigen/Core>

namespace probenorm {

// Probe orientation relative to straight-down, plus the fixed contact point
// the probe presses on.  out_plane_deg rotates about the world x axis,
// in_plane_deg about the world y axis; both are limited to (-90, 90) by the
// contact model.  Only the two angles take part in surrogate-model distance;
// the contact point is constant within a run.
struct ProbePose {
    double out_plane_deg = 0.0;
    double in_plane_deg = 0.0;
    Eigen::Vector3d contact_point = Eigen::Vector3d::Zero();
};

// Euclidean distance in the two rotation coordinates (degrees).
inline double pose_distance(const ProbePose& a, const ProbePose& b) {
    const double dx = a.out_plane_deg - b.out_plane_deg;
    const double dy = a.in_plane_deg - b.in_plane_deg;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace probenorm
