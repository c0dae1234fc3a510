#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace probenorm {

struct TriangleMesh {
    std::vector<Eigen::Vector3d> vertices;              // meters
    std::vector<std::array<int, 3>> triangles;          // indices into vertices
    std::vector<Eigen::Vector3d> normals;               // unit, per triangle
    int degenerate_dropped = 0;                         // filtered at load
    Eigen::Vector3d bbox_lo = Eigen::Vector3d::Zero();
    Eigen::Vector3d bbox_hi = Eigen::Vector3d::Zero();
};

// Dispatches on extension: .obj (text, v/f records, faces fan-triangulated)
// or .stl (binary, 80-byte header + count + 50-byte records, exact-duplicate
// vertices merged).  Degenerate triangles (area < 1e-12 m^2) are dropped and
// counted; an empty or all-degenerate mesh is a ParseError.
TriangleMesh load_mesh(const std::filesystem::path& path);

// Stream versions used by load_mesh and the tests; `name` labels errors.
TriangleMesh load_obj(std::istream& in, const std::string& name);
TriangleMesh load_stl(std::istream& in, const std::string& name);

struct RayHit {
    int triangle = -1;
    double distance = 0.0;
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    Eigen::Vector3d normal = Eigen::Vector3d::Zero();  // oriented against the ray
};

// Shear constants precomputed per ray for the watertight triangle test.
struct WatertightRay {
    Eigen::Vector3d origin;
    Eigen::Vector3d dir;
    int kx = 0, ky = 1, kz = 2;  // permuted axes, kz = dominant
    double sx = 0.0, sy = 0.0, sz = 0.0;

    static WatertightRay make(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir);
};

// Watertight ray/triangle test with deterministic edge ownership: a hit
// exactly on an edge counts only for the triangle whose winding traverses
// that edge in canonical (lexicographically increasing endpoint) direction,
// so rays through shared edges of a closed mesh register exactly one hit.
std::optional<RayHit> intersect_triangle(const TriangleMesh& mesh, int tri,
                                         const WatertightRay& ray);

struct RaycastStats {
    std::int64_t nodes_visited = 0;
    std::int64_t triangles_tested = 0;
};

// Median-split bounding-volume hierarchy over triangle centroids.
class Bvh {
public:
    static Bvh build(const TriangleMesh& mesh);

    // Nearest hit; equal distances resolve to the lowest triangle index so
    // results match an index-ordered exhaustive scan exactly.
    std::optional<RayHit> raycast(const TriangleMesh& mesh, const Eigen::Vector3d& origin,
                                  const Eigen::Vector3d& dir,
                                  RaycastStats* stats = nullptr) const;

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int max_depth() const { return max_depth_; }
    int leaf_triangles_total() const;

private:
    struct Node {
        Eigen::Vector3d lo, hi;
        int left = -1, right = -1;  // internal node when left >= 0
        int first = 0, count = 0;   // leaf range into order_
    };
    std::vector<Node> nodes_;
    std::vector<int> order_;
    int max_depth_ = 0;

    int build_node(const TriangleMesh& mesh, std::vector<Eigen::Vector3d>& centroids,
                   int first, int count, int depth);
};

struct SurfacePoint {
    Eigen::Vector3d point;
    Eigen::Vector3d normal;
};

// Surface seen from above at (x, y): casts (x, y, top) along (0,0,-1).
std::optional<SurfacePoint> surface_under(const Bvh& bvh, const TriangleMesh& mesh,
                                          double x, double y);

// Face normal where a ray from probe_point along probe_axis meets the mesh;
// throws NoContactError on a miss.
Eigen::Vector3d normal_at(const Bvh& bvh, const TriangleMesh& mesh,
                          const Eigen::Vector3d& probe_point,
                          const Eigen::Vector3d& probe_axis);

}  // namespace probenorm
