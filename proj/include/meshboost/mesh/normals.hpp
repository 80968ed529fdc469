#pragma once

#include "meshboost/mesh/mesh.hpp"

namespace meshboost {

// Per-vertex normals as the normalized area-weighted average of incident
// face normals. Degenerate faces contribute nothing; vertices with no
// incident area keep a zero normal (reported through zero_normal_count).
Mesh compute_vertex_normals(const Mesh& mesh, int* zero_normal_count = nullptr);

} // namespace meshboost
