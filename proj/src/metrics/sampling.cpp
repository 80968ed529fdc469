#include "meshboost/metrics/sampling.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

#include "meshboost/core/rng.hpp"

namespace meshboost {

std::vector<SurfaceSample> sample_surface_locations(const Mesh& mesh, int n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("sample_surface: n must be >= 1");
    const int nf = mesh.num_faces();
    if (nf < 1) throw ValidationError("sample_surface: mesh has no faces");

    std::vector<double> cumulative(nf);
    double total = 0.0;
    for (int f = 0; f < nf; ++f) {
        const Vec3 a = mesh.vertices.row(mesh.faces(f, 0));
        const Vec3 b = mesh.vertices.row(mesh.faces(f, 1));
        const Vec3 c = mesh.vertices.row(mesh.faces(f, 2));
        total += 0.5 * (b - a).cross(c - a).norm();
        cumulative[f] = total;
    }
    if (!(total > 0.0)) throw ValidationError("sample_surface: all faces are degenerate");

    Rng rng(seed);
    std::vector<SurfaceSample> samples;
    samples.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double target = rng.uniform() * total;
        const int face = static_cast<int>(
            std::lower_bound(cumulative.begin(), cumulative.end(), target) - cumulative.begin());
        const double r1 = std::sqrt(rng.uniform());
        const double r2 = rng.uniform();
        samples.push_back({std::min(face, nf - 1), 1.0 - r1, r1 * (1.0 - r2), r1 * r2});
    }
    return samples;
}

PointSet surface_sample_positions(const Eigen::Matrix<double, Eigen::Dynamic, 3>& vertices,
                                  const Eigen::Matrix<int, Eigen::Dynamic, 3>& faces,
                                  const std::vector<SurfaceSample>& samples) {
    PointSet ps;
    ps.points.resize(static_cast<Eigen::Index>(samples.size()), 3);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SurfaceSample& s = samples[i];
        ps.points.row(static_cast<Eigen::Index>(i)) = s.b0 * vertices.row(faces(s.face, 0)) +
                                                      s.b1 * vertices.row(faces(s.face, 1)) +
                                                      s.b2 * vertices.row(faces(s.face, 2));
    }
    return ps;
}

PointSet sample_surface(const Mesh& mesh, int n, std::uint64_t seed) {
    return surface_sample_positions(mesh.vertices, mesh.faces, sample_surface_locations(mesh, n, seed));
}

} // namespace meshboost
