#pragma once

#include "meshboost/core/image.hpp"
#include "meshboost/mesh/mesh.hpp"

namespace meshboost {

// Per-texel result of rasterizing the UV charts: the face whose UV triangle
// contains the texel center (-1 for background) and the barycentric
// coordinates of the center in that triangle.
struct ChartMap {
    int height = 0;
    int width = 0;
    std::vector<int> face;       // H*W, -1 = background
    std::vector<double> bary;    // H*W*3

    int face_at(int row, int col) const { return face[static_cast<std::size_t>(row) * width + col]; }
    const double* bary_at(int row, int col) const {
        return &bary[(static_cast<std::size_t>(row) * width + col) * 3];
    }
};

// UV convention: origin bottom-left, v axis up. The center of pixel
// (row i, col j) sits at u = (j + 0.5) / W, v = (H - i - 0.5) / H.
inline Vec2 texel_center_uv(int row, int col, int height, int width) {
    return Vec2((col + 0.5) / width, (height - row - 0.5) / height);
}

// Rasterizes the mesh's UV triangles at the given resolution. A texel is
// covered iff its center lies inside or on the boundary of some UV triangle
// (inclusive rule); when several triangles contain the center the smallest
// face index wins. Zero-area UV triangles are skipped. Deterministic and
// independent of thread count.
ChartMap rasterize_chart_map(const Mesh& mesh, int width, int height);

// Binary background mask M_b: 255 where some chart covers the texel center,
// 0 on background.
Image8 rasterize_background_mask(const Mesh& mesh, int width, int height);

} // namespace meshboost
