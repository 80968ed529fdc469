#pragma once

#include "meshboost/mesh/mesh.hpp"
#include "meshboost/mesh/raster.hpp"

namespace meshboost {

struct TransferConfig {
    double max_ray_distance = 0.05; // meters
    bool bidirectional = true;      // cast along +n and -n
    int atlas_width = 512;
    int atlas_height = 512;

    void validate() const {
        if (!(max_ray_distance > 0.0))
            throw ValidationError("TransferConfig: max_ray_distance must be > 0");
        if (atlas_width < 1 || atlas_height < 1)
            throw ValidationError("TransferConfig: atlas resolution must be >= 1");
    }
};

// Bilinear texture lookup at UV (origin bottom-left, v up), clamped borders.
// Returns sRGB in [0,1].
Vec3 sample_atlas_bilinear(const TextureAtlas& atlas, const Vec2& uv);

// Projects the source's partial texture onto the target's atlas: every
// foreground texel of the target reconstructs its surface point and
// interpolated normal, casts rays along the normal (both ways when
// bidirectional) against the source mesh and takes the nearest hit within
// max_ray_distance. Texels without a hit stay exact black, as does the
// background. The target must carry corner UVs and vertex normals.
TextureAtlas transfer_texture(const TexturedMesh& source, const Mesh& target,
                              const TransferConfig& cfg = {});

} // namespace meshboost
