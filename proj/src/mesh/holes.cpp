#include "meshboost/mesh/holes.hpp"

#include <vector>

#include "meshboost/core/rng.hpp"
#include "meshboost/metrics/sampling.hpp"

namespace meshboost {

std::vector<HoleBall> hole_balls(const Mesh& mesh, const HoleSpec& spec) {
    spec.validate();
    std::vector<HoleBall> balls;
    if (spec.count == 0) return balls;
    const auto centers = sample_surface(mesh, spec.count, spec.seed);
    Rng rng(spec.seed ^ 0x5deece66dull);
    for (int k = 0; k < spec.count; ++k)
        balls.push_back({centers.points.row(k).transpose(), rng.uniform(spec.radius_min, spec.radius_max)});
    return balls;
}

TexturedMesh cut_holes(const TexturedMesh& input, const HoleSpec& spec) {
    spec.validate();
    if (spec.count == 0) return input;

    const Mesh& mesh = input.mesh;
    const std::vector<HoleBall> balls = hole_balls(mesh, spec);

    std::vector<int> kept_faces;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const Vec3 centroid = (mesh.vertices.row(mesh.faces(f, 0)) + mesh.vertices.row(mesh.faces(f, 1)) +
                               mesh.vertices.row(mesh.faces(f, 2))) /
                              3.0;
        bool removed = false;
        for (const HoleBall& ball : balls)
            if ((centroid - ball.center).norm() <= ball.radius) {
                removed = true;
                break;
            }
        if (!removed) kept_faces.push_back(f);
    }
    if (kept_faces.empty()) throw ValidationError("cut_holes: empty result");

    // Compact re-index of surviving vertices, preserving vertex order.
    std::vector<bool> used(mesh.num_vertices(), false);
    for (int f : kept_faces)
        for (int k = 0; k < 3; ++k) used[mesh.faces(f, k)] = true;
    std::vector<int> remap(mesh.num_vertices(), -1);
    int next = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (used[v]) remap[v] = next++;

    TexturedMesh out;
    out.atlas = input.atlas;
    out.mesh.vertices.resize(next, 3);
    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (remap[v] != -1) out.mesh.vertices.row(remap[v]) = mesh.vertices.row(v);
    out.mesh.faces.resize(static_cast<Eigen::Index>(kept_faces.size()), 3);
    if (mesh.has_uvs()) out.mesh.corner_uvs.emplace(kept_faces.size());
    for (std::size_t i = 0; i < kept_faces.size(); ++i) {
        for (int k = 0; k < 3; ++k)
            out.mesh.faces(static_cast<Eigen::Index>(i), k) = remap[mesh.faces(kept_faces[i], k)];
        if (mesh.has_uvs()) (*out.mesh.corner_uvs)[i] = (*mesh.corner_uvs)[kept_faces[i]];
    }
    return out;
}

} // namespace meshboost
