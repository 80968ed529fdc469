#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <vector>

#include "meshboost/core/errors.hpp"
#include "meshboost/core/image.hpp"

namespace meshboost {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// Triangle mesh with an optional per-corner UV parametrization and optional
// per-vertex unit normals. Vertices are in meters.
struct Mesh {
    Eigen::Matrix<double, Eigen::Dynamic, 3> vertices;            // n_v x 3
    Eigen::Matrix<int, Eigen::Dynamic, 3> faces;                  // n_f x 3
    std::optional<std::vector<std::array<Vec2, 3>>> corner_uvs;   // n_f entries in [0,1]^2
    std::optional<Eigen::Matrix<double, Eigen::Dynamic, 3>> vertex_normals;

    int num_vertices() const { return static_cast<int>(vertices.rows()); }
    int num_faces() const { return static_cast<int>(faces.rows()); }
    bool has_uvs() const { return corner_uvs.has_value(); }

    // Throws ValidationError on any violated invariant: face indices in
    // range, finite coordinates, UVs inside [0,1]^2, normals unit length
    // (exact-zero normals are tolerated; they mark isolated vertices).
    void validate() const;
};

// 8-bit sRGB texture image.
struct TextureAtlas {
    Image8 image; // H x W x 3

    int width() const { return image.width(); }
    int height() const { return image.height(); }

    void validate() const {
        if (image.empty()) throw ValidationError("TextureAtlas: empty image");
        if (image.channels() != 3) throw ValidationError("TextureAtlas: image must be RGB");
    }
};

struct TexturedMesh {
    Mesh mesh;   // must carry corner_uvs
    TextureAtlas atlas;

    void validate() const {
        mesh.validate();
        if (!mesh.has_uvs()) throw ValidationError("TexturedMesh: mesh has no corner UVs");
        atlas.validate();
    }
};

// Parameters for synthetic hole cutting (see cut_holes).
struct HoleSpec {
    std::uint64_t seed = 0;
    int count = 0;                 // number of balls
    double radius_min = 0.05;      // meters
    double radius_max = 0.10;

    void validate() const {
        if (count < 0) throw ValidationError("HoleSpec: count must be >= 0");
        if (!(radius_min > 0.0) || !(radius_max > 0.0) || radius_min > radius_max)
            throw ValidationError("HoleSpec: need 0 < radius_min <= radius_max");
    }
};

} // namespace meshboost
