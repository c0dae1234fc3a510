#include "probenorm/contact.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Geometry>

#include "probenorm/errors.hpp"

namespace probenorm {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

Eigen::Matrix3d rot_x(double deg) {
    const double c = std::cos(deg * kDegToRad), s = std::sin(deg * kDegToRad);
    Eigen::Matrix3d r;
    r << 1, 0, 0, 0, c, -s, 0, s, c;
    return r;
}

Eigen::Matrix3d rot_y(double deg) {
    const double c = std::cos(deg * kDegToRad), s = std::sin(deg * kDegToRad);
    Eigen::Matrix3d r;
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return r;
}

void check_pose(const ProbePose& p, const char* where) {
    if (!std::isfinite(p.out_plane_deg) || !std::isfinite(p.in_plane_deg) ||
        !p.contact_point.allFinite())
        throw InvalidInputError(std::string(where) + ": non-finite pose");
}

// Unit vector in the plane orthogonal to n, as close to v as possible.
Eigen::Vector3d project_tangent(const Eigen::Vector3d& v, const Eigen::Vector3d& n) {
    const Eigen::Vector3d t = v - v.dot(n) * n;
    const double len = t.norm();
    if (len < 1e-12) {
        // v is parallel to n; any tangent works, pick a stable one.
        const Eigen::Vector3d alt =
            std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
        return (alt - alt.dot(n) * n).normalized();
    }
    return t / len;
}

}  // namespace

Eigen::Matrix3d probe_rotation(const ProbePose& p) {
    check_pose(p, "probe_rotation");
    return rot_x(p.out_plane_deg) * rot_y(p.in_plane_deg);
}

Eigen::Vector3d probe_axis(const ProbePose& p) {
    return probe_rotation(p) * Eigen::Vector3d(0.0, 0.0, -1.0);
}

double ContactSurface::SlopeWaves::eval(double x, double y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < amp.size(); ++i)
        s += amp[i] * std::sin(freq[i] * (x * dir_x[i] + y * dir_y[i]) + phase[i]);
    return s;
}

double ContactSurface::SlopeWaves::amplitude_sum() const {
    double a = 0.0;
    for (double v : amp) a += v;
    return a;
}

namespace {

void validate_common(const ProbeTip& tip, double noise) {
    if (!(tip.size_m > 0.0) || !std::isfinite(tip.size_m))
        throw InvalidInputError("ContactSurface: tip size must be positive");
    if (noise < 0.0 || !std::isfinite(noise))
        throw InvalidInputError("ContactSurface: sensor noise must be non-negative");
}

}  // namespace

ContactSurface ContactSurface::planar(ProbeTip tip, double sensor_noise_sigma,
                                      std::uint64_t rng_seed) {
    validate_common(tip, sensor_noise_sigma);
    ContactSurface s;
    s.kind_ = Kind::Planar;
    s.tip_ = tip;
    s.sensor_noise_sigma_ = sensor_noise_sigma;
    s.rng_seed_ = rng_seed;
    return s;
}

ContactSurface ContactSurface::tilted(char axis, double tilt_deg, ProbeTip tip,
                                      double sensor_noise_sigma, std::uint64_t rng_seed) {
    validate_common(tip, sensor_noise_sigma);
    if (axis != 'x' && axis != 'y')
        throw InvalidInputError("ContactSurface::tilted: axis must be 'x' or 'y'");
    if (!std::isfinite(tilt_deg) || std::abs(tilt_deg) >= 45.0)
        throw InvalidInputError("ContactSurface::tilted: tilt must be inside (-45, 45)");
    ContactSurface s;
    s.kind_ = Kind::Tilted;
    s.tip_ = tip;
    s.sensor_noise_sigma_ = sensor_noise_sigma;
    s.rng_seed_ = rng_seed;
    s.tilt_normal_ = (axis == 'x' ? rot_x(tilt_deg) : rot_y(tilt_deg)) *
                     Eigen::Vector3d::UnitZ();
    return s;
}

ContactSurface ContactSurface::rough(double max_deflection_deg, std::uint64_t field_seed,
                                     ProbeTip tip, double sensor_noise_sigma,
                                     std::uint64_t rng_seed) {
    validate_common(tip, sensor_noise_sigma);
    if (!std::isfinite(max_deflection_deg) || max_deflection_deg < 0.0 ||
        max_deflection_deg > 10.0)
        throw InvalidInputError("ContactSurface::rough: max deflection must be in [0, 10]");
    ContactSurface s;
    s.kind_ = Kind::Rough;
    s.tip_ = tip;
    s.sensor_noise_sigma_ = sensor_noise_sigma;
    s.rng_seed_ = rng_seed;

    // Spatial frequencies span a few centimeters to tens of centimeters so a
    // desk-scale tip footprint sees smooth variation.
    Rng field(field_seed);
    for (SlopeWaves* waves : {&s.slope_x_, &s.slope_y_}) {
        for (std::size_t i = 0; i < waves->amp.size(); ++i) {
            waves->amp[i] = field.uniform(0.5, 1.0);
            waves->freq[i] = field.uniform(10.0, 60.0);  // rad/m
            const double theta = field.uniform(0.0, 2.0 * M_PI);
            waves->dir_x[i] = std::cos(theta);
            waves->dir_y[i] = std::sin(theta);
            waves->phase[i] = field.uniform(0.0, 2.0 * M_PI);
        }
    }
    const double ax = s.slope_x_.amplitude_sum();
    const double ay = s.slope_y_.amplitude_sum();
    const double worst = std::sqrt(ax * ax + ay * ay);
    s.slope_scale_ =
        worst > 0.0 ? std::tan(max_deflection_deg * kDegToRad) / worst : 0.0;
    return s;
}

ContactSurface ContactSurface::mesh(TriangleMesh mesh, ProbeTip tip,
                                    double sensor_noise_sigma, std::uint64_t rng_seed) {
    validate_common(tip, sensor_noise_sigma);
    ContactSurface s;
    s.kind_ = Kind::Mesh;
    s.tip_ = tip;
    s.sensor_noise_sigma_ = sensor_noise_sigma;
    s.rng_seed_ = rng_seed;
    auto data = std::make_shared<MeshData>();
    data->bvh = Bvh::build(mesh);
    data->mesh = std::move(mesh);
    s.mesh_ = std::move(data);
    return s;
}

Eigen::Vector3d ContactSurface::field_normal(double x, double y) const {
    const double sx = slope_scale_ * slope_x_.eval(x, y);
    const double sy = slope_scale_ * slope_y_.eval(x, y);
    return Eigen::Vector3d(-sx, -sy, 1.0).normalized();
}

Eigen::Vector3d ContactSurface::true_normal(const Eigen::Vector3d& at) const {
    if (!at.allFinite()) throw InvalidInputError("true_normal: non-finite point");
    switch (kind_) {
        case Kind::Planar:
            return Eigen::Vector3d::UnitZ();
        case Kind::Tilted:
            return tilt_normal_;
        case Kind::Rough:
            return field_normal(at.x(), at.y());
        case Kind::Mesh: {
            const std::optional<SurfacePoint> sp =
                surface_under(mesh_->bvh, mesh_->mesh, at.x(), at.y());
            if (!sp) throw NoContactError("true_normal: point is off the mesh");
            return sp->normal;
        }
    }
    throw InvalidInputError("true_normal: unknown surface kind");
}

Eigen::Vector3d ContactSurface::surface_point(double x, double y) const {
    switch (kind_) {
        case Kind::Planar:
        case Kind::Rough:
            return {x, y, 0.0};
        case Kind::Tilted: {
            const Eigen::Vector3d& n = tilt_normal_;
            return {x, y, -(n.x() * x + n.y() * y) / n.z()};
        }
        case Kind::Mesh: {
            const std::optional<SurfacePoint> sp =
                surface_under(mesh_->bvh, mesh_->mesh, x, y);
            if (!sp) throw NoContactError("surface_point: point is off the mesh");
            return sp->point;
        }
    }
    throw InvalidInputError("surface_point: unknown surface kind");
}

Eigen::Vector3d ContactSurface::effective_normal(const ProbePose& p) const {
    check_pose(p, "effective_normal");
    // Uniform normal fields need no footprint treatment.
    if (kind_ == Kind::Planar) return Eigen::Vector3d::UnitZ();
    if (kind_ == Kind::Tilted) return tilt_normal_;

    const Eigen::Vector3d c = p.contact_point;
    const Eigen::Vector3d n_base =
        kind_ == Kind::Rough ? Eigen::Vector3d::UnitZ() : true_normal(c);
    const Eigen::Vector3d d = probe_axis(p);
    const Eigen::Vector3d d_tan = d - d.dot(n_base) * n_base;  // length sin(gamma)

    // The contact patch migrates as the probe rocks: a flat edge tips onto
    // its rim (half-width travel along the segment), a convex face rolls by
    // its radius.  At alignment the shift vanishes.
    const Eigen::Matrix3d rot = probe_rotation(p);
    const Eigen::Vector3d seg = project_tangent(rot * Eigen::Vector3d::UnitX(), n_base);
    Eigen::Vector3d center = c;
    if (tip_.kind == TipKind::Linear) {
        center += (tip_.size_m / 2.0) * d_tan.dot(seg) * seg;
    } else {
        center += tip_.size_m * d_tan;
    }

    // Footprint sample offsets in the surface-tangent plane.
    std::vector<Eigen::Vector3d> offsets;
    if (tip_.kind == TipKind::Linear) {
        for (int k = 0; k < 9; ++k) {
            const double u = tip_.size_m * (k / 8.0 - 0.5);
            offsets.push_back(u * seg);
        }
    } else {
        const Eigen::Vector3d t1 = seg;
        const Eigen::Vector3d t2 = n_base.cross(t1).normalized();
        offsets.push_back(Eigen::Vector3d::Zero());
        for (int k = 0; k < 6; ++k) {
            const double a = 2.0 * M_PI * k / 6.0;
            offsets.push_back(0.5 * tip_.size_m * (std::cos(a) * t1 + std::sin(a) * t2));
        }
        for (int k = 0; k < 12; ++k) {
            const double a = 2.0 * M_PI * k / 12.0;
            offsets.push_back(tip_.size_m * (std::cos(a) * t1 + std::sin(a) * t2));
        }
    }

    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int hits = 0;
    for (const Eigen::Vector3d& off : offsets) {
        const Eigen::Vector3d q = center + off;
        if (kind_ == Kind::Rough) {
            sum += field_normal(q.x(), q.y());
            ++hits;
        } else {
            const std::optional<SurfacePoint> sp =
                surface_under(mesh_->bvh, mesh_->mesh, q.x(), q.y());
            if (sp) {
                sum += sp->normal;
                ++hits;
            }
        }
    }
    if (hits == 0)
        throw NoContactError("effective_normal: tip footprint is entirely off the mesh");
    return sum.normalized();
}

ForceReading sense_force(const ProbePose& p, const ContactSurface& s,
                         const ContactModelConfig& cfg, Rng& noise_stream) {
    check_pose(p, "sense_force");
    if (!(cfg.desired_force_n > 0.0) || !std::isfinite(cfg.desired_force_n))
        throw InvalidInputError("sense_force: desired force must be positive");
    if (cfg.friction_coeff < 0.0 || !std::isfinite(cfg.friction_coeff))
        throw InvalidInputError("sense_force: friction coefficient must be >= 0");

    const Eigen::Vector3d n = s.effective_normal(p);
    const Eigen::Vector3d d = probe_axis(p);
    const double cos_gamma = -d.dot(n);
    // The <= 1e-12 band absorbs trig roundoff so poses that are parallel to
    // the surface in exact arithmetic (e.g. a 90 degree tilt, where the
    // computed cosine lands at ~6e-17) classify as separated, not grazing.
    if (cos_gamma <= 1e-12)
        throw NoContactError("sense_force: probe axis does not press into the surface");

    Eigen::Vector3d reaction = cfg.desired_force_n * cos_gamma * n;
    if (cfg.friction_coeff > 0.0) {
        const Eigen::Vector3d d_tan = d - d.dot(n) * n;
        const double sin_gamma = d_tan.norm();
        if (sin_gamma > 1e-12) {
            // Coulomb reaction opposing the tangential push, capped at the
            // static limit.
            const double mag =
                cfg.desired_force_n * std::min(cfg.friction_coeff * cos_gamma, sin_gamma);
            reaction -= mag * (d_tan / sin_gamma);
        }
    }

    const Eigen::Vector3d probe_frame = probe_rotation(p).transpose() * reaction;
    ForceReading f{probe_frame.x(), probe_frame.y(), probe_frame.z()};
    if (s.sensor_noise_sigma() > 0.0) {
        f.fx += s.sensor_noise_sigma() * noise_stream.normal();
        f.fy += s.sensor_noise_sigma() * noise_stream.normal();
        f.fz += s.sensor_noise_sigma() * noise_stream.normal();
    }
    return f;
}

double angular_error(const ProbePose& p, const ContactSurface& s) {
    const Eigen::Vector3d n = s.true_normal(p.contact_point);
    const Eigen::Vector3d d = -probe_axis(p);
    // atan2 of (sin, cos) keeps full precision near zero, where acos of a
    // rounded dot product bottoms out around 1e-8 rad.
    return std::atan2(d.cross(n).norm(), d.dot(n)) / kDegToRad;
}

}  // namespace probenorm
