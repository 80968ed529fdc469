#include "meshboost/mesh/normals.hpp"

#include <Eigen/Geometry>

namespace meshboost {

Mesh compute_vertex_normals(const Mesh& mesh, int* zero_normal_count) {
    if (mesh.num_faces() < 1) throw ValidationError("compute_vertex_normals: mesh has no faces");
    Mesh out = mesh;
    Eigen::Matrix<double, Eigen::Dynamic, 3> acc =
        Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(mesh.num_vertices(), 3);
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const Vec3 a = mesh.vertices.row(mesh.faces(f, 0));
        const Vec3 b = mesh.vertices.row(mesh.faces(f, 1));
        const Vec3 c = mesh.vertices.row(mesh.faces(f, 2));
        const Vec3 n = (b - a).cross(c - a); // length = 2 * area
        for (int k = 0; k < 3; ++k) acc.row(mesh.faces(f, k)) += n.transpose();
    }
    int zeros = 0;
    for (int i = 0; i < mesh.num_vertices(); ++i) {
        const double len = acc.row(i).norm();
        if (len > 0.0)
            acc.row(i) /= len;
        else
            ++zeros;
    }
    if (zero_normal_count) *zero_normal_count = zeros;
    out.vertex_normals = acc;
    return out;
}

} // namespace meshboost
