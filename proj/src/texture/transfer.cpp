#include "meshboost/texture/transfer.hpp"

#include <cmath>

#include "meshboost/core/parallel.hpp"
#include "meshboost/spatial/triangle_index.hpp"

namespace meshboost {

namespace {

// Rays start slightly behind the texel's surface point so a source surface
// coinciding with the target (identity transfer) is still hit; ray_cast
// rejects t <= 1e-9.
constexpr double kOriginBackoff = 1e-5;

} // namespace

Vec3 sample_atlas_bilinear(const TextureAtlas& atlas, const Vec2& uv) {
    const int w = atlas.width(), h = atlas.height();
    const double x = uv.x() * w - 0.5;
    const double y = (1.0 - uv.y()) * h - 0.5;
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    const auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    Vec3 out;
    for (int c = 0; c < 3; ++c) {
        const auto px = [&](int yy, int xx) {
            return static_cast<double>(atlas.image.at(clampi(yy, h - 1), clampi(xx, w - 1), c)) / 255.0;
        };
        const double top = px(y0, x0) * (1 - fx) + px(y0, x0 + 1) * fx;
        const double bot = px(y0 + 1, x0) * (1 - fx) + px(y0 + 1, x0 + 1) * fx;
        out[c] = top * (1 - fy) + bot * fy;
    }
    return out;
}

TextureAtlas transfer_texture(const TexturedMesh& source, const Mesh& target, const TransferConfig& cfg) {
    cfg.validate();
    if (!target.has_uvs()) throw ValidationError("transfer_texture: target has no corner UVs");
    if (!target.vertex_normals) throw ValidationError("transfer_texture: target has no vertex normals");
    if (!source.mesh.has_uvs()) throw ValidationError("transfer_texture: source has no corner UVs");
    source.atlas.validate();

    const int W = cfg.atlas_width, H = cfg.atlas_height;
    const ChartMap chart = rasterize_chart_map(target, W, H);
    const TriangleIndex source_index(source.mesh);
    const auto& source_uvs = *source.mesh.corner_uvs;

    TextureAtlas result;
    result.image = Image8(H, W, 3, 0);

    parallel_for(0, H, [&](std::int64_t row) {
        const int i = static_cast<int>(row);
        for (int j = 0; j < W; ++j) {
            const int face = chart.face_at(i, j);
            if (face < 0) continue; // background stays black
            const double* b = chart.bary_at(i, j);
            Vec3 point = Vec3::Zero(), normal = Vec3::Zero();
            for (int k = 0; k < 3; ++k) {
                const int v = target.faces(face, k);
                point += b[k] * target.vertices.row(v).transpose();
                normal += b[k] * target.vertex_normals->row(v).transpose();
            }
            const double len = normal.norm();
            if (len <= 0.0) continue;
            normal /= len;

            // Nearest source hit by absolute distance from the surface point.
            double best_dist = std::numeric_limits<double>::infinity();
            std::optional<RayHit> best_hit;
            const int dirs = cfg.bidirectional ? 2 : 1;
            for (int d = 0; d < dirs; ++d) {
                const Vec3 dir = d == 0 ? normal : Vec3(-normal);
                const Vec3 origin = point - dir * kOriginBackoff;
                const auto hit =
                    source_index.ray_cast(origin, dir, cfg.max_ray_distance + kOriginBackoff);
                if (!hit) continue;
                const double dist = std::abs(hit->t - kOriginBackoff);
                if (dist <= cfg.max_ray_distance && dist < best_dist) {
                    best_dist = dist;
                    best_hit = hit;
                }
            }
            if (!best_hit) continue;

            const auto& tri_uv = source_uvs[best_hit->face];
            const Vec2 uv = best_hit->u * tri_uv[0] + best_hit->v * tri_uv[1] + best_hit->w * tri_uv[2];
            const Vec3 rgb = sample_atlas_bilinear(source.atlas, uv);
            for (int c = 0; c < 3; ++c)
                result.image.at(i, j, c) =
                    static_cast<std::uint8_t>(std::lround(std::clamp(rgb[c], 0.0, 1.0) * 255.0));
        }
    });
    return result;
}

} // namespace meshboost
