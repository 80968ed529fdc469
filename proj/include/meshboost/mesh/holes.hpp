#pragma once

#include "meshboost/mesh/mesh.hpp"

namespace meshboost {

struct HoleBall {
    Vec3 center;
    double radius;
};

// The balls a given spec cuts out of a given mesh. Centers are sampled
// area-uniformly on the surface (seeded), radii uniformly in
// [radius_min, radius_max].
std::vector<HoleBall> hole_balls(const Mesh& mesh, const HoleSpec& spec);

// Cuts synthetic holes: removes every face whose centroid lies within one of
// the spec's balls. Surviving vertices are re-indexed compactly; corner UVs
// of surviving faces are unchanged. Throws ValidationError("empty result")
// when nothing survives.
TexturedMesh cut_holes(const TexturedMesh& input, const HoleSpec& spec);

} // namespace meshboost
