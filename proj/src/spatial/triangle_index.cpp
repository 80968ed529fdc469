#include "meshboost/spatial/triangle_index.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace meshboost {

namespace {
constexpr int kLeafSize = 4;
constexpr double kDetEpsilon = 1e-9;
constexpr double kMinT = 1e-9;
// Slightly inclusive barycentric bounds so rays on shared edges hit at least
// one of the adjacent triangles.
constexpr double kEdgeEpsilon = 1e-12;

bool better(const RayHit& candidate, const std::optional<RayHit>& best) {
    if (!best) return true;
    return candidate.t < best->t || (candidate.t == best->t && candidate.face < best->face);
}

} // namespace

std::optional<RayHit> intersect_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                         const Vec3& b, const Vec3& c, double max_dist, int face_id) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 pvec = dir.cross(e2);
    const double det = e1.dot(pvec);
    if (std::abs(det) < kDetEpsilon) return std::nullopt;
    const double inv_det = 1.0 / det;
    const Vec3 tvec = origin - a;
    const double u = tvec.dot(pvec) * inv_det;
    if (u < -kEdgeEpsilon || u > 1.0 + kEdgeEpsilon) return std::nullopt;
    const Vec3 qvec = tvec.cross(e1);
    const double v = dir.dot(qvec) * inv_det;
    if (v < -kEdgeEpsilon || u + v > 1.0 + kEdgeEpsilon) return std::nullopt;
    const double t = e2.dot(qvec) * inv_det;
    if (t <= kMinT || t > max_dist) return std::nullopt;
    return RayHit{face_id, t, 1.0 - u - v, u, v};
}

TriangleIndex::TriangleIndex(const Mesh& mesh) {
    if (mesh.num_faces() < 1) throw ValidationError("TriangleIndex: mesh has no faces");
    const int nf = mesh.num_faces();
    tri_a_.resize(nf);
    tri_b_.resize(nf);
    tri_c_.resize(nf);
    centroid_.resize(nf);
    for (int f = 0; f < nf; ++f) {
        tri_a_[f] = mesh.vertices.row(mesh.faces(f, 0));
        tri_b_[f] = mesh.vertices.row(mesh.faces(f, 1));
        tri_c_[f] = mesh.vertices.row(mesh.faces(f, 2));
        centroid_[f] = (tri_a_[f] + tri_b_[f] + tri_c_[f]) / 3.0;
    }
    order_.resize(nf);
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * nf / kLeafSize + 2);
    root_ = build(0, nf);
}

int TriangleIndex::build(int begin, int end) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (int i = begin; i < end; ++i) {
        const int f = order_[i];
        lo = lo.cwiseMin(tri_a_[f]).cwiseMin(tri_b_[f]).cwiseMin(tri_c_[f]);
        hi = hi.cwiseMax(tri_a_[f]).cwiseMax(tri_b_[f]).cwiseMax(tri_c_[f]);
    }
    if (end - begin <= kLeafSize) {
        std::sort(order_.begin() + begin, order_.begin() + end);
        Node& node = nodes_[node_id];
        node.lo = lo;
        node.hi = hi;
        node.begin = begin;
        node.end = end;
        return node_id;
    }
    Vec3 clo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 chi = -clo;
    for (int i = begin; i < end; ++i) {
        clo = clo.cwiseMin(centroid_[order_[i]]);
        chi = chi.cwiseMax(centroid_[order_[i]]);
    }
    int axis = 0;
    (chi - clo).maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int fa, int fb) {
                         const double ca = centroid_[fa][axis], cb = centroid_[fb][axis];
                         return ca < cb || (ca == cb && fa < fb);
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    Node& node = nodes_[node_id];
    node.lo = lo;
    node.hi = hi;
    node.left = left;
    node.right = right;
    return node_id;
}

namespace {

// Slab test over [0, t_limit]; inclusive so boxes touching the current best
// distance are still visited (keeps the face-id tie rule exact).
bool box_hit(const Vec3& lo, const Vec3& hi, const Vec3& origin, const Vec3& inv_dir, double t_limit) {
    double t0 = 0.0, t1 = t_limit;
    for (int k = 0; k < 3; ++k) {
        double a = (lo[k] - origin[k]) * inv_dir[k];
        double b = (hi[k] - origin[k]) * inv_dir[k];
        if (std::isnan(a) || std::isnan(b)) {
            // Ray parallel to slab: inside test.
            if (origin[k] < lo[k] || origin[k] > hi[k]) return false;
            continue;
        }
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
        if (t0 > t1) return false;
    }
    return true;
}

} // namespace

void TriangleIndex::search(int node_id, const Vec3& origin, const Vec3& dir,
                           std::optional<RayHit>& best, double max_dist) const {
    const Node& node = nodes_[node_id];
    const Vec3 inv_dir(1.0 / dir.x(), 1.0 / dir.y(), 1.0 / dir.z());
    const double limit = best ? best->t : max_dist;
    if (!box_hit(node.lo, node.hi, origin, inv_dir, limit)) return;
    if (node.is_leaf()) {
        for (int i = node.begin; i < node.end; ++i) {
            const int f = order_[i];
            const auto hit = intersect_triangle(origin, dir, tri_a_[f], tri_b_[f], tri_c_[f], max_dist, f);
            if (hit && better(*hit, best)) best = hit;
        }
        return;
    }
    search(node.left, origin, dir, best, max_dist);
    search(node.right, origin, dir, best, max_dist);
}

std::optional<RayHit> TriangleIndex::ray_cast(const Vec3& origin, const Vec3& direction,
                                              double max_dist) const {
    if (std::abs(direction.norm() - 1.0) > 1e-6)
        throw ValidationError("ray_cast: direction must be unit length");
    if (!(max_dist > 0.0)) throw ValidationError("ray_cast: max_dist must be > 0");
    std::optional<RayHit> best;
    search(root_, origin, direction, best, max_dist);
    return best;
}

std::vector<TriangleIndex::NodeBox> TriangleIndex::node_boxes() const {
    std::vector<NodeBox> out;
    out.reserve(nodes_.size());
    for (const Node& n : nodes_) {
        NodeBox nb{n.lo, n.hi, n.is_leaf(), {}};
        if (n.is_leaf())
            for (int i = n.begin; i < n.end; ++i) nb.faces.push_back(order_[i]);
        out.push_back(std::move(nb));
    }
    return out;
}

std::optional<RayHit> brute_force_ray_cast(const Mesh& mesh, const Vec3& origin, const Vec3& dir,
                                           double max_dist) {
    std::optional<RayHit> best;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const Vec3 a = mesh.vertices.row(mesh.faces(f, 0));
        const Vec3 b = mesh.vertices.row(mesh.faces(f, 1));
        const Vec3 c = mesh.vertices.row(mesh.faces(f, 2));
        const auto hit = intersect_triangle(origin, dir, a, b, c, max_dist, f);
        if (hit && better(*hit, best)) best = hit;
    }
    return best;
}

} // namespace meshboost
