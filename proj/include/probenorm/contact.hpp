#pragma once

#include <array>
#include <cstdint>
#include <memory>

#include <Eigen/Core>

#include "probenorm/mesh.hpp"
#include "probenorm/objective.hpp"
#include "probenorm/pose.hpp"
#include "probenorm/rng.hpp"

namespace probenorm {

// Probe contact geometry.  The linear tip's footprint is a segment of length
// width_m along the image plane; the convex tip's is a disc of radius_m.
enum class TipKind { Linear, Convex };

struct ProbeTip {
    TipKind kind = TipKind::Linear;
    double size_m = 0.04;  // full width (linear) or radius (convex)
};

struct ContactModelConfig {
    double desired_force_n = 5.0;  // held along the probe axis
    double friction_coeff = 0.0;   // tangential Coulomb coefficient
};

// Rotation taking the straight-down reference orientation to the pose:
// out-plane about world x first, then in-plane about world y.
Eigen::Matrix3d probe_rotation(const ProbePose& p);

// Direction the probe presses along: probe_rotation * (0,0,-1), unit length.
Eigen::Vector3d probe_axis(const ProbePose& p);

// Immutable scanned surface: planar, tilted plane, planar base with a
// seeded smooth normal-deflection field, or a triangle mesh.  Carries the
// probe tip, the per-axis sensor noise level, and a seed that feeds each
// run's noise stream.
class ContactSurface {
public:
    enum class Kind { Planar, Tilted, Rough, Mesh };

    static ContactSurface planar(ProbeTip tip = {}, double sensor_noise_sigma = 0.05,
                                 std::uint64_t rng_seed = 0);
    // axis: 'x' (out-plane tilt) or 'y' (in-plane tilt); |tilt| < 45.
    static ContactSurface tilted(char axis, double tilt_deg, ProbeTip tip = {},
                                 double sensor_noise_sigma = 0.05,
                                 std::uint64_t rng_seed = 0);
    // Deflection field: seeded sum of 8 sinusoids per slope component,
    // scaled so the total normal deflection never exceeds max_deflection_deg
    // (<= 10).
    static ContactSurface rough(double max_deflection_deg, std::uint64_t field_seed,
                                ProbeTip tip = {}, double sensor_noise_sigma = 0.05,
                                std::uint64_t rng_seed = 0);
    static ContactSurface mesh(TriangleMesh mesh, ProbeTip tip = {},
                               double sensor_noise_sigma = 0.05,
                               std::uint64_t rng_seed = 0);

    Kind kind() const { return kind_; }
    const ProbeTip& tip() const { return tip_; }
    double sensor_noise_sigma() const { return sensor_noise_sigma_; }
    std::uint64_t rng_seed() const { return rng_seed_; }

    // Ground-truth unit normal at a surface point (mesh: face under a
    // vertical ray at at.x/at.y; throws NoContactError off the mesh).
    Eigen::Vector3d true_normal(const Eigen::Vector3d& at) const;

    // Normal the force model reacts against: the true normal field averaged
    // over the tip footprint, centered at the tilt-shifted contact point.
    Eigen::Vector3d effective_normal(const ProbePose& p) const;

    // Point on the surface at the given horizontal position, for placing the
    // run's contact point.
    Eigen::Vector3d surface_point(double x, double y) const;

    const TriangleMesh* mesh_data() const { return mesh_ ? &mesh_->mesh : nullptr; }

private:
    struct MeshData {
        TriangleMesh mesh;
        Bvh bvh;
    };
    // One slope component: sum of 8 seeded sinusoids over the xy plane.
    struct SlopeWaves {
        std::array<double, 8> amp, freq, dir_x, dir_y, phase;
        double eval(double x, double y) const;
        double amplitude_sum() const;
    };

    ContactSurface() = default;

    Eigen::Vector3d field_normal(double x, double y) const;

    Kind kind_ = Kind::Planar;
    ProbeTip tip_;
    double sensor_noise_sigma_ = 0.05;
    std::uint64_t rng_seed_ = 0;
    Eigen::Vector3d tilt_normal_ = Eigen::Vector3d::UnitZ();
    SlopeWaves slope_x_{}, slope_y_{};
    double slope_scale_ = 0.0;
    std::shared_ptr<const MeshData> mesh_;
};

// Reaction force in the probe frame for a probe pressed at pose p with the
// axial force regulated to cfg.desired_force_n.  Frictionless by default:
// world reaction (f^d cos gamma) n, so f_z = f^d cos^2 gamma and the
// tangential components carry f^d cos gamma sin gamma.  Per-axis Gaussian
// sensor noise is drawn from noise_stream (the run owns the stream).
// Throws NoContactError when the axis does not press into the surface.
ForceReading sense_force(const ProbePose& p, const ContactSurface& s,
                         const ContactModelConfig& cfg, Rng& noise_stream);

// Angle in degrees between the pressing direction and the true normal.
double angular_error(const ProbePose& p, const ContactSurface& s);

}  // namespace probenorm
