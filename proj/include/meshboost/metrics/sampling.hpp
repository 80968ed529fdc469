#pragma once

#include <cstdint>

#include "meshboost/mesh/mesh.hpp"

namespace meshboost {

// n x 3 point set in meters.
struct PointSet {
    Eigen::Matrix<double, Eigen::Dynamic, 3> points;

    int size() const { return static_cast<int>(points.rows()); }
};

// A location on a mesh surface: face index plus barycentric weights.
struct SurfaceSample {
    int face;
    double b0, b1, b2;
};

// Draws n locations area-uniformly (face chosen proportionally to area,
// uniform barycentric within the face). Deterministic per seed. Throws when
// every face is degenerate.
std::vector<SurfaceSample> sample_surface_locations(const Mesh& mesh, int n, std::uint64_t seed);

// Positions of surface locations on a (possibly deformed) vertex set with
// the same topology.
PointSet surface_sample_positions(const Eigen::Matrix<double, Eigen::Dynamic, 3>& vertices,
                                  const Eigen::Matrix<int, Eigen::Dynamic, 3>& faces,
                                  const std::vector<SurfaceSample>& samples);

// sample_surface = positions of sample_surface_locations on the mesh itself.
PointSet sample_surface(const Mesh& mesh, int n, std::uint64_t seed);

} // namespace meshboost
