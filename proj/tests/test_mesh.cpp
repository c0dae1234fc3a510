#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <sstream>
#include <vector>

#include <Eigen/Geometry>

#include "doctest.h"
#include "probenorm/errors.hpp"
#include "probenorm/mesh.hpp"
#include "probenorm/rng.hpp"

using probenorm::Bvh;
using probenorm::RayHit;
using probenorm::RaycastStats;
using probenorm::Rng;
using probenorm::TriangleMesh;
using probenorm::WatertightRay;

namespace {

TriangleMesh obj_from_string(const std::string& text) {
    std::istringstream in(text);
    return probenorm::load_obj(in, "inline.obj");
}

// Axis-aligned cube [-h, h]^3 as 12 triangles with outward winding.
TriangleMesh make_cube(double h) {
    std::ostringstream obj;
    const int sign[8][3] = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                            {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};
    for (const auto& s : sign)
        obj << "v " << s[0] * h << " " << s[1] * h << " " << s[2] * h << "\n";
    // Quads, fan-triangulated by the loader.  The raycast tests below do not
    // depend on winding: hit normals are reported against the ray.
    obj << "f 1 2 3 4\n";  // -z
    obj << "f 5 8 7 6\n";  // +z
    obj << "f 1 5 6 2\n";  // -y
    obj << "f 3 7 8 4\n";  // +y
    obj << "f 2 6 7 3\n";  // +x
    obj << "f 1 4 8 5\n";  // -x
    return obj_from_string(obj.str());
}

std::vector<std::byte> stl_bytes(const std::vector<std::array<float, 12>>& tris) {
    std::vector<std::byte> out(80, std::byte{0});
    const std::uint32_t n = static_cast<std::uint32_t>(tris.size());
    const auto push = [&](const void* p, std::size_t len) {
        const std::byte* b = static_cast<const std::byte*>(p);
        out.insert(out.end(), b, b + len);
    };
    push(&n, 4);
    for (const auto& t : tris) {
        push(t.data(), 48);
        const std::uint16_t attr = 0;
        push(&attr, 2);
    }
    return out;
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("obj loading handles quads, negatives and comments") {
    const TriangleMesh m = obj_from_string(
        "# a unit square split in two\n"
        "v 0 0 0\n"
        "v 1 0 0\n"
        "v 1 1 0\n"
        "v -1 1 0   # trailing comment\n"
        "\n"
        "f 1 2 3 -1\n");
    CHECK(m.vertices.size() == 4);
    CHECK(m.triangles.size() == 2);  // quad fan = 2 triangles
    CHECK(m.triangles[0] == std::array<int, 3>{0, 1, 2});
    CHECK(m.triangles[1] == std::array<int, 3>{0, 2, 3});
    CHECK(m.bbox_lo.x() == doctest::Approx(-1.0));
    CHECK(m.bbox_hi.y() == doctest::Approx(1.0));
    // Unit normals.
    for (const Eigen::Vector3d& n : m.normals)
        CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("obj rejects malformed content with line numbers") {
    const auto expect_error = [](const std::string& text, const std::string& token) {
        try {
            obj_from_string(text);
            FAIL("expected ParseError for: " << text);
        } catch (const probenorm::ParseError& e) {
            CHECK(std::string(e.what()).find(token) != std::string::npos);
        }
    };
    expect_error("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n", ":4:");  // bad index
    expect_error("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 0\n", ":4:");  // index 0
    expect_error("v 0 0\n", ":1:");                               // short vertex
    expect_error("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n", ":4:");    // short face
    expect_error("f 1 2 3\n", ":1:");  // face before any vertex exists
    // Ignorable records (vn, vt, o, ...) are skipped, so a file with only
    // those still fails for lack of vertices, without a line number.
    expect_error("vn 0 0 1\n", "no vertices");
}

TEST_CASE("obj with no faces or all-degenerate faces fails") {
    CHECK_THROWS_AS(obj_from_string("v 0 0 0\nv 1 0 0\nv 0 1 0\n"),
                    probenorm::ParseError);
    // Zero-area sliver: three collinear points.
    CHECK_THROWS_AS(obj_from_string("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n"),
                    probenorm::ParseError);
}

TEST_CASE("degenerate faces are dropped and counted") {
    const TriangleMesh m = obj_from_string(
        "v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\n"
        "f 1 2 3\n"   // collinear, dropped
        "f 1 2 4\n");
    CHECK(m.triangles.size() == 1);
    CHECK(m.degenerate_dropped == 1);
}

TEST_CASE("binary stl round-trips and merges duplicate vertices") {
    // Two triangles sharing the edge (1,0,0)-(0,1,0), written with the shared
    // vertices repeated, as STL always does.
    std::vector<std::array<float, 12>> tris;
    tris.push_back({0, 0, 1, /*v0*/ 0, 0, 0, /*v1*/ 1, 0, 0, /*v2*/ 0, 1, 0});
    tris.push_back({0, 0, 1, /*v0*/ 1, 0, 0, /*v1*/ 1, 1, 0, /*v2*/ 0, 1, 0});
    const std::vector<std::byte> bytes = stl_bytes(tris);

    std::istringstream in(
        std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    const TriangleMesh m = probenorm::load_stl(in, "inline.stl");
    CHECK(m.vertices.size() == 4);  // 6 corners, 2 shared
    CHECK(m.triangles.size() == 2);
}

TEST_CASE("stl with a wrong byte count is rejected") {
    std::vector<std::array<float, 12>> tris;
    tris.push_back({0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0});
    std::vector<std::byte> bytes = stl_bytes(tris);
    bytes.pop_back();  // truncate
    std::istringstream in(
        std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    CHECK_THROWS_AS(probenorm::load_stl(in, "short.stl"), probenorm::ParseError);

    bytes = stl_bytes(tris);
    bytes.push_back(std::byte{7});  // trailing garbage
    std::istringstream in2(
        std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    CHECK_THROWS_AS(probenorm::load_stl(in2, "long.stl"), probenorm::ParseError);
}

TEST_CASE("ray hits a triangle straight on") {
    const TriangleMesh m = obj_from_string(
        "v -1 -1 0\nv 1 -1 0\nv 0 1 0\n"
        "f 1 2 3\n");
    const WatertightRay ray =
        WatertightRay::make({0.0, 0.0, 3.0}, {0.0, 0.0, -1.0});
    const std::optional<RayHit> hit = probenorm::intersect_triangle(m, 0, ray);
    REQUIRE(hit.has_value());
    CHECK(hit->distance == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(hit->point.z() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    // Normal is reported against the ray direction.
    CHECK(hit->normal.z() == doctest::Approx(1.0).epsilon(1e-12));

    // A parallel ray misses.
    const WatertightRay side =
        WatertightRay::make({0.0, 0.0, 3.0}, {1.0, 0.0, 0.0});
    CHECK_FALSE(probenorm::intersect_triangle(m, 0, side).has_value());
}

TEST_CASE("rays through shared edges hit exactly one triangle") {
    // Unit square split along the diagonal (0,0)-(1,1) plus rays sampled
    // along that diagonal: the watertight ownership rule must assign each
    // edge point to exactly one of the two triangles.
    const TriangleMesh m = obj_from_string(
        "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
        "f 1 2 3\nf 1 3 4\n");
    for (int i = 1; i < 20; ++i) {
        const double t = i / 20.0;
        const WatertightRay ray =
            WatertightRay::make({t, t, 5.0}, {0.0, 0.0, -1.0});
        int hits = 0;
        for (int tri = 0; tri < 2; ++tri)
            hits += probenorm::intersect_triangle(m, tri, ray).has_value() ? 1 : 0;
        CHECK(hits == 1);
    }
    // Same along the outer shared-vertex corners: still at most one owner.
    const WatertightRay corner = WatertightRay::make({0.0, 0.0, 5.0}, {0.0, 0.0, -1.0});
    int corner_hits = 0;
    for (int tri = 0; tri < 2; ++tri)
        corner_hits += probenorm::intersect_triangle(m, tri, corner).has_value() ? 1 : 0;
    CHECK(corner_hits <= 1);
}

TEST_CASE("closed cube: vertical rays always see exactly one entry face") {
    const TriangleMesh m = make_cube(0.5);
    REQUIRE(m.triangles.size() == 12);
    const Bvh bvh = Bvh::build(m);

    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const double x = rng.uniform(-0.49, 0.49);
        const double y = rng.uniform(-0.49, 0.49);
        const std::optional<RayHit> hit =
            bvh.raycast(m, {x, y, 2.0}, {0.0, 0.0, -1.0});
        REQUIRE(hit.has_value());
        CHECK(hit->distance == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(hit->point.z() == doctest::Approx(0.5).epsilon(1e-12));
    }

    // Rays across edge lines of the top quad's fan diagonal.
    for (int i = 1; i < 10; ++i) {
        const double t = -0.5 + i / 10.0;
        const WatertightRay ray = WatertightRay::make({t, t, 2.0}, {0.0, 0.0, -1.0});
        int hits = 0;
        for (std::size_t tri = 0; tri < m.triangles.size(); ++tri) {
            const std::optional<RayHit> h =
                probenorm::intersect_triangle(m, static_cast<int>(tri), ray);
            if (h && h->point.z() > 0.0) ++hits;  // entry through the top face
        }
        CHECK(hits == 1);
    }
}

TEST_CASE("bvh equals the exhaustive scan on random rays") {
    const TriangleMesh m = probenorm::load_mesh("data/meshes/cube_bevel.obj");
    const Bvh bvh = Bvh::build(m);
    CHECK(bvh.leaf_triangles_total() == static_cast<int>(m.triangles.size()));

    Rng rng(2718);
    const Eigen::Vector3d span = m.bbox_hi - m.bbox_lo;
    for (int i = 0; i < 500; ++i) {
        const Eigen::Vector3d origin =
            m.bbox_lo - 0.25 * span +
            1.5 * Eigen::Vector3d(rng.uniform() * span.x(), rng.uniform() * span.y(),
                                  rng.uniform() * span.z());
        Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
        if (dir.norm() < 1e-9) dir = Eigen::Vector3d(0, 0, 1);
        dir.normalize();

        const std::optional<RayHit> fast = bvh.raycast(m, origin, dir);

        const WatertightRay ray = WatertightRay::make(origin, dir);
        std::optional<RayHit> slow;
        for (std::size_t tri = 0; tri < m.triangles.size(); ++tri) {
            const std::optional<RayHit> h =
                probenorm::intersect_triangle(m, static_cast<int>(tri), ray);
            if (!h) continue;
            if (!slow || h->distance < slow->distance ||
                (h->distance == slow->distance && h->triangle < slow->triangle))
                slow = h;
        }

        REQUIRE(fast.has_value() == slow.has_value());
        if (fast) {
            CHECK(fast->triangle == slow->triangle);
            CHECK(fast->distance == doctest::Approx(slow->distance).epsilon(1e-12));
        }
    }
}

TEST_CASE("bvh prunes most triangles on a dense sphere") {
    // Lat-long sphere, about 1e5 triangles.
    TriangleMesh m;
    const int lat = 224, lon = 224;
    for (int i = 0; i <= lat; ++i) {
        const double theta = M_PI * i / lat;
        for (int j = 0; j < lon; ++j) {
            const double phi = 2.0 * M_PI * j / lon;
            m.vertices.emplace_back(0.1 * std::sin(theta) * std::cos(phi),
                                    0.1 * std::sin(theta) * std::sin(phi),
                                    0.1 * std::cos(theta));
        }
    }
    const auto idx = [&](int i, int j) { return i * lon + (j % lon); };
    for (int i = 0; i < lat; ++i) {
        for (int j = 0; j < lon; ++j) {
            const int a = idx(i, j), b = idx(i + 1, j), c = idx(i + 1, j + 1),
                      d = idx(i, j + 1);
            m.triangles.push_back({a, b, c});
            m.triangles.push_back({a, c, d});
        }
    }
    for (const auto& t : m.triangles) {
        const Eigen::Vector3d n = (m.vertices[t[1]] - m.vertices[t[0]])
                                      .cross(m.vertices[t[2]] - m.vertices[t[0]]);
        m.normals.push_back(n.norm() > 0 ? n.normalized() : Eigen::Vector3d(0, 0, 1));
    }
    m.bbox_lo = Eigen::Vector3d(-0.1, -0.1, -0.1);
    m.bbox_hi = Eigen::Vector3d(0.1, 0.1, 0.1);

    const Bvh bvh = Bvh::build(m);
    CHECK(bvh.max_depth() <= 64);

    Rng rng(99);
    RaycastStats stats;
    int hits = 0;
    for (int i = 0; i < 200; ++i) {
        Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
        dir.normalize();
        if (bvh.raycast(m, {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), 0.3},
                        dir, &stats))
            ++hits;
    }
    CHECK(hits > 0);
    const double tested_per_ray =
        static_cast<double>(stats.triangles_tested) / 200.0;
    CHECK(tested_per_ray < 0.05 * static_cast<double>(m.triangles.size()));
}

TEST_CASE("surface queries on the bundled meshes") {
    const TriangleMesh cube = probenorm::load_mesh("data/meshes/cube_bevel.obj");
    const Bvh bvh = Bvh::build(cube);

    const auto top = probenorm::surface_under(bvh, cube, 0.0, 0.0);
    REQUIRE(top.has_value());
    CHECK(top->point.z() == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(top->normal.z() == doctest::Approx(1.0).epsilon(1e-12));

    // Straight-down normal on the flat top.
    const Eigen::Vector3d n =
        probenorm::normal_at(bvh, cube, {0.0, 0.0, 0.5}, {0.0, 0.0, -1.0});
    CHECK(n.z() == doctest::Approx(1.0).epsilon(1e-12));

    // A ray that misses the object entirely.
    CHECK_THROWS_AS(
        probenorm::normal_at(bvh, cube, {5.0, 5.0, 0.5}, {0.0, 0.0, -1.0}),
        probenorm::NoContactError);
    CHECK_FALSE(probenorm::surface_under(bvh, cube, 5.0, 5.0).has_value());
}

TEST_CASE("bundled meshes are closed and well-formed") {
    for (const char* path : {"data/meshes/cube_bevel.obj", "data/meshes/torso.obj"}) {
        const TriangleMesh m = probenorm::load_mesh(path);
        CHECK(m.degenerate_dropped == 0);
        REQUIRE(!m.triangles.empty());

        // Every undirected edge is shared by exactly two triangles.
        std::map<std::pair<int, int>, int> edges;
        for (const auto& t : m.triangles) {
            for (int k = 0; k < 3; ++k) {
                const int a = t[k], b = t[(k + 1) % 3];
                ++edges[{std::min(a, b), std::max(a, b)}];
            }
        }
        for (const auto& [edge, count] : edges) CHECK(count == 2);
    }
}

TEST_CASE("unknown extension is rejected") {
    CHECK_THROWS_AS(probenorm::load_mesh("data/meshes/missing.ply"),
                    probenorm::ParseError);
}

}  // TEST_SUITE
