#include "meshboost/mesh/raster.hpp"

#include <algorithm>
#include <cmath>

#include "meshboost/core/parallel.hpp"

namespace meshboost {

namespace {

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

} // namespace

ChartMap rasterize_chart_map(const Mesh& mesh, int width, int height) {
    if (!mesh.has_uvs()) throw ValidationError("rasterize: mesh has no corner UVs");
    if (width < 1 || height < 1) throw ValidationError("rasterize: resolution must be >= 1");

    ChartMap map;
    map.height = height;
    map.width = width;
    map.face.assign(static_cast<std::size_t>(height) * width, -1);
    map.bary.assign(static_cast<std::size_t>(height) * width * 3, 0.0);

    // Bucket faces by the rows their UV bounding box touches, so each row can
    // be rasterized independently.
    const auto& uvs = *mesh.corner_uvs;
    std::vector<std::vector<int>> rows(height);
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& tri = uvs[f];
        double vmin = 1.0, vmax = 0.0;
        for (const auto& uv : tri) {
            vmin = std::min(vmin, uv.y());
            vmax = std::max(vmax, uv.y());
        }
        // v = (H - i - 0.5) / H  =>  i = H - v*H - 0.5
        int i_lo = static_cast<int>(std::floor(height - vmax * height - 0.5));
        int i_hi = static_cast<int>(std::ceil(height - vmin * height - 0.5));
        i_lo = std::max(0, i_lo);
        i_hi = std::min(height - 1, i_hi);
        for (int i = i_lo; i <= i_hi; ++i) rows[i].push_back(f);
    }

    parallel_for(0, height, [&](std::int64_t i) {
        for (int f : rows[static_cast<std::size_t>(i)]) {
            const Vec2& a = uvs[f][0];
            const Vec2& b = uvs[f][1];
            const Vec2& c = uvs[f][2];
            const double area2 = cross2(b - a, c - a);
            if (area2 == 0.0) continue; // zero-area UV triangle
            double umin = std::min({a.x(), b.x(), c.x()});
            double umax = std::max({a.x(), b.x(), c.x()});
            int j_lo = std::max(0, static_cast<int>(std::floor(umin * width - 0.5)));
            int j_hi = std::min(width - 1, static_cast<int>(std::ceil(umax * width - 0.5)));
            for (int j = j_lo; j <= j_hi; ++j) {
                const std::size_t idx = static_cast<std::size_t>(i) * width + j;
                if (map.face[idx] != -1 && map.face[idx] < f) continue; // smaller id already claimed it
                const Vec2 p = texel_center_uv(static_cast<int>(i), j, height, width);
                const double e0 = cross2(b - a, p - a);
                const double e1 = cross2(c - b, p - b);
                const double e2 = cross2(a - c, p - c);
                const bool inside = area2 > 0.0 ? (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0)
                                                : (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0);
                if (!inside) continue;
                map.face[idx] = f;
                map.bary[idx * 3 + 0] = e1 / area2;
                map.bary[idx * 3 + 1] = e2 / area2;
                map.bary[idx * 3 + 2] = e0 / area2;
            }
        }
    });
    return map;
}

Image8 rasterize_background_mask(const Mesh& mesh, int width, int height) {
    const ChartMap map = rasterize_chart_map(mesh, width, height);
    Image8 mask(height, width, 1, 0);
    for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j)
            if (map.face_at(i, j) >= 0) mask.at(i, j) = 255;
    return mask;
}

} // namespace meshboost
