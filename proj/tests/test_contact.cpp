#include <cmath>
#include <vector>

#include "doctest.h"
#include "probenorm/contact.hpp"
#include "probenorm/errors.hpp"
#include "probenorm/rng.hpp"

using probenorm::ContactModelConfig;
using probenorm::ContactSurface;
using probenorm::ForceReading;
using probenorm::ProbePose;
using probenorm::ProbeTip;
using probenorm::Rng;
using probenorm::TipKind;

namespace {

ProbePose pose(double out_deg, double in_deg) {
    ProbePose p;
    p.out_plane_deg = out_deg;
    p.in_plane_deg = in_deg;
    return p;
}

constexpr double kDeg = M_PI / 180.0;

}  // namespace

TEST_SUITE("contact") {

TEST_CASE("probe axis follows the two rotations") {
    CHECK(probenorm::probe_axis(pose(0, 0)).isApprox(Eigen::Vector3d(0, 0, -1), 1e-12));
    // Out-plane 90: the axis swings into +y.
    CHECK(probenorm::probe_axis(pose(90, 0)).isApprox(Eigen::Vector3d(0, 1, 0), 1e-12));
    // In-plane 90: the axis swings into -x.
    CHECK(probenorm::probe_axis(pose(0, 90)).isApprox(Eigen::Vector3d(-1, 0, 0), 1e-12));
    CHECK(probenorm::probe_axis(pose(10, -7)).norm() == doctest::Approx(1.0));
}

TEST_CASE("frictionless reading on a flat surface") {
    const ContactSurface s = ContactSurface::planar(ProbeTip{}, 0.0);
    Rng noise(1);

    // Aligned: all 5 N arrive axially.
    const ForceReading f0 = probenorm::sense_force(pose(0, 0), s, {}, noise);
    CHECK(f0.fx == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(f0.fy == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(f0.fz == doctest::Approx(5.0).epsilon(1e-12));

    // In-plane 45: fz = 5 cos^2 = 2.5, lateral = -2.5 in x.
    const ForceReading f45 = probenorm::sense_force(pose(0, 45), s, {}, noise);
    CHECK(f45.fx == doctest::Approx(-2.5).epsilon(1e-12));
    CHECK(f45.fy == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(f45.fz == doctest::Approx(2.5).epsilon(1e-12));

    // Out-plane 45 mirrors into +y.
    const ForceReading g45 = probenorm::sense_force(pose(45, 0), s, {}, noise);
    CHECK(g45.fx == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(g45.fy == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(g45.fz == doctest::Approx(2.5).epsilon(1e-12));

    // The axial component falls as cos^2 of the misalignment.
    for (double gamma = 5.0; gamma <= 60.0; gamma += 5.0) {
        const ForceReading f = probenorm::sense_force(pose(gamma, 0), s, {}, noise);
        const double c = std::cos(gamma * kDeg);
        CHECK(f.fz == doctest::Approx(5.0 * c * c).epsilon(1e-12));
    }
}

TEST_CASE("force reading reconstructs a consistent world-frame reaction") {
    // Rotating the probe-frame reading back to world must give a vector
    // whose normal component is f^d cos(gamma) along the surface normal.
    const ContactSurface s = ContactSurface::planar(ProbeTip{}, 0.0);
    Rng noise(1);
    for (double out = -40.0; out <= 40.0; out += 10.0) {
        for (double in = -40.0; in <= 40.0; in += 10.0) {
            const ProbePose p = pose(out, in);
            const ForceReading f = probenorm::sense_force(p, s, {}, noise);
            const Eigen::Vector3d world =
                probenorm::probe_rotation(p) * Eigen::Vector3d(f.fx, f.fy, f.fz);
            const double cos_gamma =
                -probenorm::probe_axis(p).dot(Eigen::Vector3d::UnitZ());
            CHECK(world.z() == doctest::Approx(5.0 * cos_gamma).epsilon(1e-9));
            // Frictionless: no component parallel to the plane.
            CHECK(world.head<2>().norm() ==
                  doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("grazing or separating poses do not produce contact") {
    const ContactSurface s = ContactSurface::planar(ProbeTip{}, 0.0);
    Rng noise(1);
    CHECK_THROWS_AS(probenorm::sense_force(pose(90, 0), s, {}, noise),
                    probenorm::NoContactError);
    CHECK_THROWS_AS(probenorm::sense_force(pose(0, -90), s, {}, noise),
                    probenorm::NoContactError);
}

TEST_CASE("angular error on the flat surface") {
    const ContactSurface s = ContactSurface::planar(ProbeTip{}, 0.0);
    CHECK(probenorm::angular_error(pose(0, 0), s) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(probenorm::angular_error(pose(10, 0), s) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(probenorm::angular_error(pose(0, -10), s) ==
          doctest::Approx(10.0).epsilon(1e-12));
    // Both axes at 10 degrees compose to acos(cos10 * cos10).
    CHECK(probenorm::angular_error(pose(10, 10), s) ==
          doctest::Approx(14.10604426056639).epsilon(1e-12));
}

TEST_CASE("tilted surface shifts the optimum to the tilt angle") {
    const ContactSurface sx = ContactSurface::tilted('x', 10.0, ProbeTip{}, 0.0);
    // Normal of a plane tilted about x: (0, -sin, cos).
    const Eigen::Vector3d n = sx.true_normal(Eigen::Vector3d::Zero());
    CHECK(n.x() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(n.y() == doctest::Approx(-0.17364817766693033).epsilon(1e-12));
    CHECK(n.z() == doctest::Approx(0.984807753012208).epsilon(1e-12));

    // Pressing with out-plane = +10 aligns exactly.
    CHECK(probenorm::angular_error(pose(10, 0), sx) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    Rng noise(1);
    const ForceReading f = probenorm::sense_force(pose(10, 0), sx, {}, noise);
    CHECK(f.fz == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(std::abs(f.fx) < 1e-9);
    CHECK(std::abs(f.fy) < 1e-9);

    // Tilt about y pairs with the in-plane rotation the same way.
    const ContactSurface sy = ContactSurface::tilted('y', 6.0, ProbeTip{}, 0.0);
    CHECK(probenorm::angular_error(pose(0, 6), sy) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

    // The plane passes through the origin and falls away along the tilt.
    const Eigen::Vector3d p = sx.surface_point(0.0, 0.1);
    CHECK(p.z() == doctest::Approx(0.1 * std::tan(10.0 * kDeg)).epsilon(1e-9));

    CHECK_THROWS_AS(ContactSurface::tilted('z', 5.0), probenorm::InvalidInputError);
    CHECK_THROWS_AS(ContactSurface::tilted('x', 60.0), probenorm::InvalidInputError);
}

TEST_CASE("friction at the static cap cancels the lateral reading") {
    // When mu cos(gamma) >= sin(gamma) the full reaction opposes the probe
    // axis, so the probe-frame reading collapses to (0, 0, f^d).
    const ContactSurface s = ContactSurface::planar(ProbeTip{}, 0.0);
    Rng noise(1);
    ContactModelConfig cfg;
    cfg.friction_coeff = 2.0;
    const ForceReading f = probenorm::sense_force(pose(30, 0), s, cfg, noise);
    CHECK(f.fx == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(f.fy == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(f.fz == doctest::Approx(5.0).epsilon(1e-9));

    // Below the cap the tangential term is mu * normal load.
    cfg.friction_coeff = 0.2;
    const double gamma = 30.0 * kDeg;
    const ForceReading g = probenorm::sense_force(pose(30, 0), s, cfg, noise);
    const Eigen::Vector3d world =
        probenorm::probe_rotation(pose(30, 0)) * Eigen::Vector3d(g.fx, g.fy, g.fz);
    const double normal_load = 5.0 * std::cos(gamma);
    CHECK(world.z() == doctest::Approx(normal_load).epsilon(1e-9));
    CHECK(world.head<2>().norm() == doctest::Approx(0.2 * normal_load).epsilon(1e-9));
    // Friction raises the axial reading toward the regulated force.
    const ForceReading f0 = probenorm::sense_force(pose(30, 0), s, {}, noise);
    CHECK(g.fz > f0.fz);
}

TEST_CASE("sensor noise is seeded and per-run reproducible") {
    const ContactSurface s = ContactSurface::planar(ProbeTip{}, 0.05);
    Rng a(1234), b(1234), c(99);
    const ForceReading fa = probenorm::sense_force(pose(5, 0), s, {}, a);
    const ForceReading fb = probenorm::sense_force(pose(5, 0), s, {}, b);
    const ForceReading fc = probenorm::sense_force(pose(5, 0), s, {}, c);
    CHECK(fa.fx == fb.fx);
    CHECK(fa.fy == fb.fy);
    CHECK(fa.fz == fb.fz);
    CHECK(fa.fx != fc.fx);

    // Noise perturbs all three axes around the exact reading.
    Rng d(7);
    double dev = 0.0;
    for (int i = 0; i < 200; ++i) {
        const ForceReading f = probenorm::sense_force(pose(0, 0), s, {}, d);
        dev += std::abs(f.fz - 5.0) + std::abs(f.fx) + std::abs(f.fy);
    }
    CHECK(dev / 600.0 == doctest::Approx(0.05 * std::sqrt(2.0 / M_PI)).epsilon(0.15));
}

TEST_CASE("rough surface honors its deflection bound") {
    for (const std::uint64_t seed : {1ULL, 2ULL, 77ULL}) {
        const ContactSurface s = ContactSurface::rough(5.0, seed, ProbeTip{}, 0.0);
        Rng grid(seed);
        double max_seen = 0.0;
        for (int i = 0; i < 400; ++i) {
            const Eigen::Vector3d at(grid.uniform(-0.5, 0.5), grid.uniform(-0.5, 0.5),
                                     0.0);
            const Eigen::Vector3d n = s.true_normal(at);
            CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
            const double tilt = std::acos(std::min(1.0, n.z())) / kDeg;
            REQUIRE(tilt <= 5.0 + 1e-9);
            max_seen = std::max(max_seen, tilt);
        }
        // The bound is tight enough to be meaningful: some real deflection.
        CHECK(max_seen > 0.5);
    }
}

TEST_CASE("rough fields are reproducible per seed and differ across seeds") {
    const ContactSurface a = ContactSurface::rough(5.0, 42, ProbeTip{}, 0.0);
    const ContactSurface b = ContactSurface::rough(5.0, 42, ProbeTip{}, 0.0);
    const ContactSurface c = ContactSurface::rough(5.0, 43, ProbeTip{}, 0.0);
    const Eigen::Vector3d at(0.123, -0.456, 0.0);
    CHECK((a.true_normal(at) - b.true_normal(at)).norm() == 0.0);
    CHECK((a.true_normal(at) - c.true_normal(at)).norm() > 0.0);
    CHECK_THROWS_AS(ContactSurface::rough(11.0, 1), probenorm::InvalidInputError);
}

TEST_CASE("footprint averaging smooths the rough field") {
    // The linear tip averages the normal over a 4 cm segment, so its
    // effective normal differs from the point normal on a wavy field;
    // the much smaller convex tip stays closer to the point normal.
    const ContactSurface wide =
        ContactSurface::rough(5.0, 9, ProbeTip{TipKind::Linear, 0.04}, 0.0);
    const ContactSurface narrow =
        ContactSurface::rough(5.0, 9, ProbeTip{TipKind::Convex, 0.01}, 0.0);

    double wide_dev = 0.0, narrow_dev = 0.0;
    Rng grid(5);
    for (int i = 0; i < 100; ++i) {
        ProbePose p = pose(0, 0);
        p.contact_point << grid.uniform(-0.3, 0.3), grid.uniform(-0.3, 0.3), 0.0;
        const Eigen::Vector3d point_normal = wide.true_normal(p.contact_point);
        const Eigen::Vector3d we = wide.effective_normal(p);
        const Eigen::Vector3d ne = narrow.effective_normal(p);
        CHECK(we.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(ne.norm() == doctest::Approx(1.0).epsilon(1e-12));
        wide_dev += std::acos(std::min(1.0, we.dot(point_normal)));
        narrow_dev += std::acos(std::min(1.0, ne.dot(point_normal)));
    }
    CHECK(narrow_dev < wide_dev);
}

TEST_CASE("planar and tilted surfaces have position-independent normals") {
    const ContactSurface s = ContactSurface::tilted('x', 8.0, ProbeTip{}, 0.0);
    const Eigen::Vector3d n1 = s.true_normal(Eigen::Vector3d(0, 0, 0));
    const Eigen::Vector3d n2 = s.true_normal(Eigen::Vector3d(0.3, -0.2, 0.0));
    CHECK((n1 - n2).norm() == 0.0);
    // Effective == true for constant-normal surfaces, any tip.
    ProbePose p = pose(3, -4);
    CHECK(s.effective_normal(p).isApprox(n1, 1e-12));
}

TEST_CASE("mesh surface exposes face normals and supports probing") {
    const probenorm::TriangleMesh m = probenorm::load_mesh("data/meshes/cube_bevel.obj");
    const ContactSurface s = ContactSurface::mesh(m, ProbeTip{}, 0.0);
    REQUIRE(s.mesh_data() != nullptr);

    // Flat top: normal +z, surface point at z = 0.1.
    const Eigen::Vector3d top = s.surface_point(0.0, 0.0);
    CHECK(top.z() == doctest::Approx(0.1).epsilon(1e-9));
    const Eigen::Vector3d n = s.true_normal(top);
    CHECK(n.z() == doctest::Approx(1.0).epsilon(1e-12));

    ProbePose p = pose(0, 0);
    p.contact_point = top;
    CHECK(probenorm::angular_error(p, s) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    Rng noise(3);
    const ForceReading f = probenorm::sense_force(p, s, {}, noise);
    CHECK(f.fz == doctest::Approx(5.0).epsilon(1e-9));

    // Off the mesh there is nothing to press against.
    ProbePose off = pose(0, 0);
    off.contact_point << 5.0, 5.0, 0.1;
    CHECK_THROWS_AS(probenorm::sense_force(off, s, {}, noise),
                    probenorm::NoContactError);
    CHECK_THROWS_AS(s.true_normal(Eigen::Vector3d(5.0, 5.0, 0.0)),
                    probenorm::NoContactError);
}

TEST_CASE("bad construction parameters are rejected") {
    CHECK_THROWS_AS(ContactSurface::planar(ProbeTip{TipKind::Linear, -0.01}),
                    probenorm::InvalidInputError);
    CHECK_THROWS_AS(ContactSurface::planar(ProbeTip{}, -0.05),
                    probenorm::InvalidInputError);
    Rng noise(1);
    const ContactSurface s = ContactSurface::planar(ProbeTip{}, 0.0);
    ContactModelConfig cfg;
    cfg.desired_force_n = 0.0;
    CHECK_THROWS_AS(probenorm::sense_force(pose(0, 0), s, cfg, noise),
                    probenorm::InvalidInputError);
    cfg.desired_force_n = 5.0;
    cfg.friction_coeff = -0.5;
    CHECK_THROWS_AS(probenorm::sense_force(pose(0, 0), s, cfg, noise),
                    probenorm::InvalidInputError);
}

}  // TEST_SUITE
