#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "meshboost/core/errors.hpp"
#include "meshboost/mesh/mesh.hpp"

namespace meshboost {

struct RayHit {
    int face;                // face index in the source mesh
    double t;                // distance along the (unit) ray direction
    double u, v, w;          // barycentric coordinates, u + v + w = 1
};

// Ray-triangle intersection for one triangle (Moeller-Trumbore, double
// precision). Determinant epsilon 1e-9; hits with t <= 1e-9 are rejected so
// rays started on a surface do not hit their own origin.
std::optional<RayHit> intersect_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                         const Vec3& b, const Vec3& c, double max_dist, int face_id);

// Bounding volume hierarchy over mesh triangles. Immutable after build,
// safe for concurrent queries.
class TriangleIndex {
public:
    explicit TriangleIndex(const Mesh& mesh);

    // Nearest intersection with t in (1e-9, max_dist], or nullopt. Ties in t
    // are broken by the smaller face index.
    std::optional<RayHit> ray_cast(const Vec3& origin, const Vec3& direction, double max_dist) const;

    int num_triangles() const { return static_cast<int>(tri_a_.size()); }

    // Exposed for the containment invariant tests.
    struct NodeBox {
        Vec3 lo, hi;
        bool leaf;
        std::vector<int> faces; // leaf only
    };
    std::vector<NodeBox> node_boxes() const;

private:
    struct Node {
        Vec3 lo, hi;
        int left = -1, right = -1;
        int begin = 0, end = 0; // leaf triangle range into order_
        bool is_leaf() const { return left < 0; }
    };

    int build(int begin, int end);
    void search(int node_id, const Vec3& origin, const Vec3& dir, std::optional<RayHit>& best,
                double max_dist) const;

    std::vector<Vec3> tri_a_, tri_b_, tri_c_, centroid_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// O(n_f) reference: tests every triangle, same per-triangle test and tie rule.
std::optional<RayHit> brute_force_ray_cast(const Mesh& mesh, const Vec3& origin, const Vec3& dir,
                                           double max_dist);

} // namespace meshboost
