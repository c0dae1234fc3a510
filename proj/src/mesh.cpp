#include "probenorm/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Geometry>

#include "probenorm/errors.hpp"

namespace probenorm {

namespace {

constexpr double kDegenerateArea = 1e-12;  // m^2
constexpr double kBoxPad = 1e-9;           // m, absorbs roundoff at leaf boxes

[[noreturn]] void parse_fail(const std::string& name, int line, const std::string& what) {
    std::ostringstream msg;
    msg << name << ":" << line << ": " << what;
    throw ParseError(msg.str());
}

// Drops degenerate triangles, computes face normals and bounds; the loaders
// feed raw geometry through here so every mesh satisfies the invariants.
TriangleMesh finalize_mesh(std::vector<Eigen::Vector3d> vertices,
                           std::vector<std::array<int, 3>> triangles,
                           const std::string& name) {
    TriangleMesh m;
    m.vertices = std::move(vertices);
    for (const std::array<int, 3>& t : triangles) {
        const Eigen::Vector3d& a = m.vertices[t[0]];
        const Eigen::Vector3d cross =
            (m.vertices[t[1]] - a).cross(m.vertices[t[2]] - a);
        const double area = 0.5 * cross.norm();
        if (area < kDegenerateArea) {
            ++m.degenerate_dropped;
            continue;
        }
        m.triangles.push_back(t);
        m.normals.push_back(cross.normalized());
    }
    if (m.triangles.empty())
        throw ParseError(name + ": no non-degenerate triangles in mesh");
    m.bbox_lo = m.bbox_hi = m.vertices.front();
    for (const Eigen::Vector3d& v : m.vertices) {
        m.bbox_lo = m.bbox_lo.cwiseMin(v);
        m.bbox_hi = m.bbox_hi.cwiseMax(v);
    }
    return m;
}

int parse_obj_index(const std::string& token, int vertex_count, const std::string& name,
                    int line) {
    const std::string head = token.substr(0, token.find('/'));
    std::size_t used = 0;
    long idx = 0;
    try {
        idx = std::stol(head, &used);
    } catch (const std::exception&) {
        parse_fail(name, line, "face index '" + token + "' is not a number");
    }
    if (used != head.size())
        parse_fail(name, line, "face index '" + token + "' is not a number");
    if (idx < 0) idx += vertex_count + 1;  // OBJ relative indexing
    if (idx < 1 || idx > vertex_count)
        parse_fail(name, line,
                   "vertex index " + head + " out of range (have " +
                       std::to_string(vertex_count) + " vertices)");
    return static_cast<int>(idx - 1);
}

}  // namespace

TriangleMesh load_obj(std::istream& in, const std::string& name) {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Eigen::Vector3d v;
            if (!(ls >> v.x() >> v.y() >> v.z()))
                parse_fail(name, line_no, "vertex needs three coordinates");
            if (!v.allFinite()) parse_fail(name, line_no, "non-finite vertex coordinate");
            vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string token;
            while (ls >> token)
                idx.push_back(parse_obj_index(token, static_cast<int>(vertices.size()),
                                              name, line_no));
            if (idx.size() < 3) parse_fail(name, line_no, "face needs at least 3 vertices");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k)
                triangles.push_back({idx[0], idx[k], idx[k + 1]});
        }
        // vn/vt/o/g/s/usemtl/mtllib and friends carry no geometry we need.
    }
    if (vertices.empty()) throw ParseError(name + ": no vertices");
    return finalize_mesh(std::move(vertices), std::move(triangles), name);
}

TriangleMesh load_stl(std::istream& in, const std::string& name) {
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() < 84) throw ParseError(name + ": truncated STL header");
    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 80, 4);
    const std::size_t expected = 84 + static_cast<std::size_t>(count) * 50;
    if (bytes.size() != expected) {
        std::ostringstream msg;
        msg << name << ": binary STL size mismatch (header says " << count
            << " triangles, implies " << expected << " bytes, file has " << bytes.size()
            << "); ASCII STL is not supported";
        throw ParseError(msg.str());
    }

    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::map<std::array<double, 3>, int> dedupe;  // exact-coordinate merge
    const auto vertex_id = [&](const Eigen::Vector3d& v) {
        const auto [it, inserted] =
            dedupe.try_emplace({v.x(), v.y(), v.z()}, static_cast<int>(vertices.size()));
        if (inserted) vertices.push_back(v);
        return it->second;
    };

    for (std::uint32_t t = 0; t < count; ++t) {
        const char* rec = bytes.data() + 84 + static_cast<std::size_t>(t) * 50;
        float f[12];
        std::memcpy(f, rec, 48);  // normal (ignored) + 3 vertices
        std::array<int, 3> tri;
        for (int v = 0; v < 3; ++v) {
            const Eigen::Vector3d p(f[3 + 3 * v], f[4 + 3 * v], f[5 + 3 * v]);
            if (!p.allFinite())
                throw ParseError(name + ": non-finite vertex in triangle " +
                                 std::to_string(t));
            tri[v] = vertex_id(p);
        }
        triangles.push_back(tri);
    }
    if (vertices.empty()) throw ParseError(name + ": empty STL");
    return finalize_mesh(std::move(vertices), std::move(triangles), name);
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj") {
        std::ifstream in(path);
        if (!in) throw ParseError(path.string() + ": cannot open file");
        return load_obj(in, path.string());
    }
    if (ext == ".stl") {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError(path.string() + ": cannot open file");
        return load_stl(in, path.string());
    }
    throw ParseError(path.string() + ": unsupported mesh format (need .obj or .stl)");
}

WatertightRay WatertightRay::make(const Eigen::Vector3d& origin,
                                  const Eigen::Vector3d& dir) {
    if (!origin.allFinite() || !dir.allFinite())
        throw InvalidInputError("raycast: non-finite ray");
    if (std::abs(dir.norm() - 1.0) > 1e-9)
        throw InvalidInputError("raycast: direction must be unit length");
    WatertightRay r;
    r.origin = origin;
    r.dir = dir;
    r.kz = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(dir[i]) > std::abs(dir[r.kz])) r.kz = i;
    r.kx = (r.kz + 1) % 3;
    r.ky = (r.kx + 1) % 3;
    if (dir[r.kz] < 0.0) std::swap(r.kx, r.ky);  // keeps winding sign consistent
    r.sx = dir[r.kx] / dir[r.kz];
    r.sy = dir[r.ky] / dir[r.kz];
    r.sz = 1.0 / dir[r.kz];
    return r;
}

namespace {

// True when the directed edge a->b runs in canonical (lexicographically
// increasing) coordinate order.  A closed, consistently wound mesh stores
// each interior edge once in each direction, so exactly one incident
// triangle owns it.
bool owns_edge(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    if (a.x() != b.x()) return a.x() < b.x();
    if (a.y() != b.y()) return a.y() < b.y();
    return a.z() < b.z();
}

}  // namespace

std::optional<RayHit> intersect_triangle(const TriangleMesh& mesh, int tri,
                                         const WatertightRay& ray) {
    const std::array<int, 3>& t = mesh.triangles[tri];
    const Eigen::Vector3d& va = mesh.vertices[t[0]];
    const Eigen::Vector3d& vb = mesh.vertices[t[1]];
    const Eigen::Vector3d& vc = mesh.vertices[t[2]];
    const Eigen::Vector3d a = va - ray.origin;
    const Eigen::Vector3d b = vb - ray.origin;
    const Eigen::Vector3d c = vc - ray.origin;

    const double ax = a[ray.kx] - ray.sx * a[ray.kz];
    const double ay = a[ray.ky] - ray.sy * a[ray.kz];
    const double bx = b[ray.kx] - ray.sx * b[ray.kz];
    const double by = b[ray.ky] - ray.sy * b[ray.kz];
    const double cx = c[ray.kx] - ray.sx * c[ray.kz];
    const double cy = c[ray.ky] - ray.sy * c[ray.kz];

    const double u = cx * by - cy * bx;
    const double v = ax * cy - ay * cx;
    const double w = bx * ay - by * ax;
    if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0))
        return std::nullopt;
    const double det = u + v + w;
    if (det == 0.0) return std::nullopt;

    // Boundary hits (a zero barycentric coordinate) belong to exactly one of
    // the triangles sharing the edge opposite that coordinate's vertex.
    if (u == 0.0 && !owns_edge(vb, vc)) return std::nullopt;
    if (v == 0.0 && !owns_edge(vc, va)) return std::nullopt;
    if (w == 0.0 && !owns_edge(va, vb)) return std::nullopt;

    const double az = ray.sz * a[ray.kz];
    const double bz = ray.sz * b[ray.kz];
    const double cz = ray.sz * c[ray.kz];
    const double tt = u * az + v * bz + w * cz;
    if ((det > 0.0 && tt < 0.0) || (det < 0.0 && tt > 0.0)) return std::nullopt;

    RayHit hit;
    hit.triangle = tri;
    hit.distance = tt / det;
    hit.point = ray.origin + hit.distance * ray.dir;
    hit.normal = mesh.normals[tri];
    if (hit.normal.dot(ray.dir) > 0.0) hit.normal = -hit.normal;
    return hit;
}

int Bvh::build_node(const TriangleMesh& mesh, std::vector<Eigen::Vector3d>& centroids,
                    int first, int count, int depth) {
    max_depth_ = std::max(max_depth_, depth);
    Node node;
    node.lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    node.hi = -node.lo;
    Eigen::Vector3d clo = node.lo, chi = node.hi;
    for (int i = first; i < first + count; ++i) {
        for (int v : mesh.triangles[order_[i]]) {
            node.lo = node.lo.cwiseMin(mesh.vertices[v]);
            node.hi = node.hi.cwiseMax(mesh.vertices[v]);
        }
        clo = clo.cwiseMin(centroids[order_[i]]);
        chi = chi.cwiseMax(centroids[order_[i]]);
    }
    node.lo.array() -= kBoxPad;
    node.hi.array() += kBoxPad;

    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (count <= 4 || depth >= 64) {
        nodes_[index].first = first;
        nodes_[index].count = count;
        return index;
    }

    int axis = 0;
    const Eigen::Vector3d extent = chi - clo;
    for (int i = 1; i < 3; ++i)
        if (extent[i] > extent[axis]) axis = i;
    const int mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid,
                     order_.begin() + first + count, [&](int lhs, int rhs) {
                         if (centroids[lhs][axis] != centroids[rhs][axis])
                             return centroids[lhs][axis] < centroids[rhs][axis];
                         return lhs < rhs;  // deterministic total order
                     });
    if (mid == first || mid == first + count) {  // all centroids identical
        nodes_[index].first = first;
        nodes_[index].count = count;
        return index;
    }
    const int left = build_node(mesh, centroids, first, mid - first, depth + 1);
    const int right = build_node(mesh, centroids, mid, first + count - mid, depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

Bvh Bvh::build(const TriangleMesh& mesh) {
    if (mesh.triangles.empty()) throw InvalidInputError("build_bvh: empty mesh");
    Bvh bvh;
    const int n = static_cast<int>(mesh.triangles.size());
    bvh.order_.resize(n);
    for (int i = 0; i < n; ++i) bvh.order_[i] = i;
    std::vector<Eigen::Vector3d> centroids(n);
    for (int i = 0; i < n; ++i) {
        const std::array<int, 3>& t = mesh.triangles[i];
        centroids[i] =
            (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
    }
    bvh.nodes_.reserve(static_cast<std::size_t>(2 * n));
    bvh.build_node(mesh, centroids, 0, n, 0);
    return bvh;
}

int Bvh::leaf_triangles_total() const {
    int total = 0;
    for (const Node& n : nodes_)
        if (n.left < 0) total += n.count;
    return total;
}

namespace {

// Slab test; returns the entry distance or nothing.  fmin/fmax absorb the
// NaNs that appear when a ray lies exactly in a slab plane.
std::optional<double> box_entry(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                                const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& inv_dir) {
    double tmin = 0.0;
    double tmax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        const double t1 = (lo[i] - origin[i]) * inv_dir[i];
        const double t2 = (hi[i] - origin[i]) * inv_dir[i];
        tmin = std::fmax(tmin, std::fmin(t1, t2));
        tmax = std::fmin(tmax, std::fmax(t1, t2));
    }
    if (tmin > tmax) return std::nullopt;
    return tmin;
}

}  // namespace

std::optional<RayHit> Bvh::raycast(const TriangleMesh& mesh, const Eigen::Vector3d& origin,
                                   const Eigen::Vector3d& dir, RaycastStats* stats) const {
    const WatertightRay ray = WatertightRay::make(origin, dir);
    const Eigen::Vector3d inv_dir = dir.cwiseInverse();

    std::optional<RayHit> best;
    int stack[96];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (stats) ++stats->nodes_visited;
        const std::optional<double> entry = box_entry(node.lo, node.hi, origin, inv_dir);
        if (!entry || (best && *entry > best->distance)) continue;
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                const int tri = order_[i];
                if (stats) ++stats->triangles_tested;
                const std::optional<RayHit> hit = intersect_triangle(mesh, tri, ray);
                if (!hit) continue;
                if (!best || hit->distance < best->distance ||
                    (hit->distance == best->distance && tri < best->triangle)) {
                    best = hit;
                }
            }
            continue;
        }
        // Visit the nearer child first so the far side can often be pruned.
        const std::optional<double> el =
            box_entry(nodes_[node.left].lo, nodes_[node.left].hi, origin, inv_dir);
        const std::optional<double> er =
            box_entry(nodes_[node.right].lo, nodes_[node.right].hi, origin, inv_dir);
        const double dl = el ? *el : std::numeric_limits<double>::infinity();
        const double dr = er ? *er : std::numeric_limits<double>::infinity();
        const int near = dl <= dr ? node.left : node.right;
        const int far = dl <= dr ? node.right : node.left;
        stack[top++] = far;
        stack[top++] = near;
    }
    return best;
}

std::optional<SurfacePoint> surface_under(const Bvh& bvh, const TriangleMesh& mesh,
                                          double x, double y) {
    const Eigen::Vector3d origin(x, y, mesh.bbox_hi.z() + 1.0);
    const std::optional<RayHit> hit =
        bvh.raycast(mesh, origin, Eigen::Vector3d(0.0, 0.0, -1.0));
    if (!hit) return std::nullopt;
    return SurfacePoint{hit->point, hit->normal};
}

Eigen::Vector3d normal_at(const Bvh& bvh, const TriangleMesh& mesh,
                          const Eigen::Vector3d& probe_point,
                          const Eigen::Vector3d& probe_axis) {
    const std::optional<RayHit> hit = bvh.raycast(mesh, probe_point, probe_axis);
    if (!hit) {
        std::ostringstream msg;
        msg << "normal_at: no surface along (" << probe_axis.transpose() << ") from ("
            << probe_point.transpose() << ")";
        throw NoContactError(msg.str());
    }
    return hit->normal;
}

}  // namespace probenorm
