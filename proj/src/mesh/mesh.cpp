#include "meshboost/mesh/mesh.hpp"

#include <cmath>

namespace meshboost {

void Mesh::validate() const {
    const int nv = num_vertices();
    for (int i = 0; i < nv; ++i)
        for (int k = 0; k < 3; ++k)
            if (!std::isfinite(vertices(i, k)))
                throw ValidationError("Mesh: non-finite vertex coordinate at vertex " + std::to_string(i));
    for (int f = 0; f < num_faces(); ++f)
        for (int k = 0; k < 3; ++k) {
            const int idx = faces(f, k);
            if (idx < 0 || idx >= nv)
                throw ValidationError("Mesh: face " + std::to_string(f) + " references vertex " +
                                      std::to_string(idx) + " out of range [0," + std::to_string(nv) + ")");
        }
    if (corner_uvs) {
        if (static_cast<int>(corner_uvs->size()) != num_faces())
            throw ValidationError("Mesh: corner_uvs size does not match face count");
        for (const auto& tri : *corner_uvs)
            for (const auto& uv : tri)
                if (!(uv.x() >= 0.0 && uv.x() <= 1.0 && uv.y() >= 0.0 && uv.y() <= 1.0))
                    throw ValidationError("Mesh: UV outside [0,1]^2");
    }
    if (vertex_normals) {
        if (vertex_normals->rows() != vertices.rows())
            throw ValidationError("Mesh: vertex_normals size does not match vertex count");
        for (int i = 0; i < nv; ++i) {
            const double len = vertex_normals->row(i).norm();
            if (len != 0.0 && std::abs(len - 1.0) > 1e-6)
                throw ValidationError("Mesh: non-unit normal at vertex " + std::to_string(i));
        }
    }
}

} // namespace meshboost
