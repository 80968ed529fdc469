#include "meshboost/render/render.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>

#include "meshboost/core/parallel.hpp"
#include "meshboost/texture/transfer.hpp"

namespace meshboost {

CameraPreset camera_preset_from_string(const std::string& name) {
    if (name == "front") return CameraPreset::Front;
    if (name == "back") return CameraPreset::Back;
    if (name == "left") return CameraPreset::Left;
    if (name == "right") return CameraPreset::Right;
    throw ValidationError("unknown camera preset '" + name + "' (front|back|left|right)");
}

namespace {

struct ProjectedVertex {
    double sx, sy;   // screen coordinates (pixels)
    double inv_z;    // 1 / camera depth
    bool valid;
};

} // namespace

Image8 render_mesh(const TexturedMesh& tm, const RenderConfig& cfg) {
    cfg.validate();
    const Mesh& mesh = tm.mesh;
    if (mesh.num_faces() < 1) throw ValidationError("render_mesh: mesh has no faces");
    const bool textured = mesh.has_uvs() && !tm.atlas.image.empty();

    const Vec3 lo = mesh.vertices.colwise().minCoeff();
    const Vec3 hi = mesh.vertices.colwise().maxCoeff();
    const Vec3 center = 0.5 * (lo + hi);
    const double radius = std::max(1e-6, 0.5 * (hi - lo).norm());

    Vec3 view_dir; // from camera toward the scene
    switch (cfg.camera) {
        case CameraPreset::Front: view_dir = Vec3(0, 0, -1); break;
        case CameraPreset::Back: view_dir = Vec3(0, 0, 1); break;
        case CameraPreset::Left: view_dir = Vec3(1, 0, 0); break;
        case CameraPreset::Right: view_dir = Vec3(-1, 0, 0); break;
    }
    const double fov = cfg.fov_degrees * M_PI / 180.0;
    const double distance = 1.15 * radius / std::sin(fov / 2.0);
    const Vec3 eye = center - view_dir * distance;
    const Vec3 up(0, 1, 0);
    const Vec3 right = view_dir.cross(up).normalized();
    const Vec3 cam_up = right.cross(view_dir);

    const double focal = 0.5 * cfg.height / std::tan(fov / 2.0);
    const auto project = [&](const Vec3& p) {
        ProjectedVertex out;
        const Vec3 rel = p - eye;
        const double z = rel.dot(view_dir);
        if (z <= 1e-9) {
            out.valid = false;
            return out;
        }
        out.valid = true;
        out.inv_z = 1.0 / z;
        out.sx = 0.5 * cfg.width + focal * rel.dot(right) / z;
        out.sy = 0.5 * cfg.height - focal * rel.dot(cam_up) / z;
        return out;
    };

    std::vector<ProjectedVertex> projected(mesh.num_vertices());
    for (int i = 0; i < mesh.num_vertices(); ++i) projected[i] = project(mesh.vertices.row(i).transpose());

    // Bucket faces by the rows their screen bounding box touches.
    std::vector<std::vector<int>> rows(cfg.height);
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const ProjectedVertex& a = projected[mesh.faces(f, 0)];
        const ProjectedVertex& b = projected[mesh.faces(f, 1)];
        const ProjectedVertex& c = projected[mesh.faces(f, 2)];
        if (!a.valid || !b.valid || !c.valid) continue;
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.sy, b.sy, c.sy}) - 0.5)));
        const int y1 = std::min(cfg.height - 1, static_cast<int>(std::ceil(std::max({a.sy, b.sy, c.sy}) - 0.5)) + 1);
        for (int i = y0; i <= y1; ++i) rows[i].push_back(f);
    }

    Image8 image(cfg.height, cfg.width, 3, 40);
    std::vector<double> zbuf(static_cast<std::size_t>(cfg.height) * cfg.width, 0.0); // stores 1/z, larger = nearer

    parallel_for(0, cfg.height, [&](std::int64_t row) {
        const int i = static_cast<int>(row);
        const double py = i + 0.5;
        for (int f : rows[static_cast<std::size_t>(i)]) {
            const int va = mesh.faces(f, 0), vb = mesh.faces(f, 1), vc = mesh.faces(f, 2);
            const ProjectedVertex& a = projected[va];
            const ProjectedVertex& b = projected[vb];
            const ProjectedVertex& c = projected[vc];
            const double area2 = (b.sx - a.sx) * (c.sy - a.sy) - (b.sy - a.sy) * (c.sx - a.sx);
            if (area2 == 0.0) continue;

            // Flat headlight shading.
            const Vec3 pa = mesh.vertices.row(va), pb = mesh.vertices.row(vb), pc = mesh.vertices.row(vc);
            Vec3 n = (pb - pa).cross(pc - pa);
            const double nlen = n.norm();
            if (nlen == 0.0) continue;
            n /= nlen;
            const double shade = 0.2 + 0.8 * std::max(0.0, n.dot(-view_dir));

            const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.sx, b.sx, c.sx}) - 0.5)));
            const int x1 = std::min(cfg.width - 1,
                                    static_cast<int>(std::ceil(std::max({a.sx, b.sx, c.sx}) - 0.5)) + 1);
            for (int j = x0; j <= x1; ++j) {
                const double px = j + 0.5;
                const double e0 = (b.sx - a.sx) * (py - a.sy) - (b.sy - a.sy) * (px - a.sx);
                const double e1 = (c.sx - b.sx) * (py - b.sy) - (c.sy - b.sy) * (px - b.sx);
                const double e2 = (a.sx - c.sx) * (py - c.sy) - (a.sy - c.sy) * (px - c.sx);
                const bool inside = area2 > 0.0 ? (e0 >= 0 && e1 >= 0 && e2 >= 0)
                                                : (e0 <= 0 && e1 <= 0 && e2 <= 0);
                if (!inside) continue;
                const double w0 = e1 / area2, w1 = e2 / area2, w2 = e0 / area2;
                const double inv_z = w0 * a.inv_z + w1 * b.inv_z + w2 * c.inv_z;
                const std::size_t idx = static_cast<std::size_t>(i) * cfg.width + j;
                if (inv_z <= zbuf[idx]) continue;
                zbuf[idx] = inv_z;

                Vec3 rgb(0.7, 0.7, 0.7);
                if (textured) {
                    // Perspective-correct UV interpolation.
                    const auto& uvs = (*mesh.corner_uvs)[f];
                    const Vec2 uv = (w0 * a.inv_z * uvs[0] + w1 * b.inv_z * uvs[1] +
                                     w2 * c.inv_z * uvs[2]) /
                                    inv_z;
                    rgb = sample_atlas_bilinear(tm.atlas, uv);
                }
                for (int ch = 0; ch < 3; ++ch)
                    image.at(i, j, ch) = static_cast<std::uint8_t>(
                        std::lround(std::clamp(rgb[ch] * shade, 0.0, 1.0) * 255.0));
            }
        }
    });
    return image;
}

} // namespace meshboost
