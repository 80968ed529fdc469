#include "meshboost/mesh/synthetic_body.hpp"

#include <Eigen/Geometry>

#include <cmath>

#include "meshboost/core/rng.hpp"

namespace meshboost {

namespace {

constexpr int kNumParts = 10;

const char* kPartNames[kNumParts] = {"torso",       "head",        "upper_arm_l", "forearm_l",
                                     "upper_arm_r", "forearm_r",   "thigh_l",     "shin_l",
                                     "thigh_r",     "shin_r"};

// One profile station: axial offset along the lathe axis and ring radius.
struct Station {
    Vec3 center;
    double radius;
};

// Lathe surface: bottom pole, rings of `segments` vertices at each station,
// top pole. UVs live in the part's chart rectangle; u wraps around the axis
// (seam duplicated per corner), v runs pole to pole.
struct LatheSpec {
    Vec3 pole_bottom;
    Vec3 pole_top;
    std::vector<Station> stations;
    Vec3 u_dir, w_dir; // orthonormal frame perpendicular to the axis
    int segments;
    std::array<double, 4> chart; // u_min, v_min, u_max, v_max
};

void append_lathe(const LatheSpec& spec, std::vector<Vec3>& vertices, std::vector<std::array<int, 3>>& faces,
                  std::vector<std::array<Vec2, 3>>& uvs) {
    const int s = spec.segments;
    const int nrings = static_cast<int>(spec.stations.size());
    const int base = static_cast<int>(vertices.size());

    const auto chart_uv = [&spec](double lu, double lv) {
        return Vec2(spec.chart[0] + lu * (spec.chart[2] - spec.chart[0]),
                    spec.chart[1] + lv * (spec.chart[3] - spec.chart[1]));
    };
    const double dv = 1.0 / (nrings + 1);

    vertices.push_back(spec.pole_bottom);
    for (int j = 0; j < nrings; ++j) {
        const Station& st = spec.stations[j];
        for (int k = 0; k < s; ++k) {
            const double theta = 2.0 * M_PI * k / s;
            vertices.push_back(st.center + st.radius * (std::cos(theta) * spec.u_dir + std::sin(theta) * spec.w_dir));
        }
    }
    vertices.push_back(spec.pole_top);
    const int top = static_cast<int>(vertices.size()) - 1;

    const auto ring_vertex = [&](int j, int k) { return base + 1 + j * s + (k % s); };
    const auto ring_v = [&](int j) { return (j + 1) * dv; };

    // Bottom fan.
    for (int k = 0; k < s; ++k) {
        faces.push_back({base, ring_vertex(0, k + 1), ring_vertex(0, k)});
        uvs.push_back({chart_uv((k + 0.5) / s, 0.0), chart_uv(static_cast<double>(k + 1) / s, ring_v(0)),
                       chart_uv(static_cast<double>(k) / s, ring_v(0))});
    }
    // Ring strips.
    for (int j = 0; j + 1 < nrings; ++j)
        for (int k = 0; k < s; ++k) {
            const double u0 = static_cast<double>(k) / s, u1 = static_cast<double>(k + 1) / s;
            const double v0 = ring_v(j), v1 = ring_v(j + 1);
            faces.push_back({ring_vertex(j, k), ring_vertex(j, k + 1), ring_vertex(j + 1, k + 1)});
            uvs.push_back({chart_uv(u0, v0), chart_uv(u1, v0), chart_uv(u1, v1)});
            faces.push_back({ring_vertex(j, k), ring_vertex(j + 1, k + 1), ring_vertex(j + 1, k)});
            uvs.push_back({chart_uv(u0, v0), chart_uv(u1, v1), chart_uv(u0, v1)});
        }
    // Top fan.
    for (int k = 0; k < s; ++k) {
        faces.push_back({top, ring_vertex(nrings - 1, k), ring_vertex(nrings - 1, k + 1)});
        uvs.push_back({chart_uv((k + 0.5) / s, 1.0), chart_uv(static_cast<double>(k) / s, ring_v(nrings - 1)),
                       chart_uv(static_cast<double>(k + 1) / s, ring_v(nrings - 1))});
    }
}

// Capsule from a to b with hemispherical caps of the given radius.
LatheSpec capsule(const Vec3& a, const Vec3& b, double radius, int segments, int cap_rings, int cyl_rings,
                  const std::array<double, 4>& chart) {
    LatheSpec spec;
    Vec3 axis = b - a;
    const double len = axis.norm();
    const Vec3 d = len > 0.0 ? Vec3(axis / len) : Vec3(0, 1, 0);
    spec.u_dir = d.unitOrthogonal();
    spec.w_dir = d.cross(spec.u_dir);
    spec.segments = segments;
    spec.chart = chart;
    spec.pole_bottom = a - d * radius;
    spec.pole_top = b + d * radius;
    for (int i = 1; i <= cap_rings; ++i) {
        const double phi = -M_PI / 2.0 + (M_PI / 2.0) * i / (cap_rings + 1);
        spec.stations.push_back({a + d * (radius * std::sin(phi)), radius * std::cos(phi)});
    }
    for (int i = 0; i <= cyl_rings; ++i)
        spec.stations.push_back({a + axis * (static_cast<double>(i) / cyl_rings), radius});
    for (int i = 1; i <= cap_rings; ++i) {
        const double phi = (M_PI / 2.0) * i / (cap_rings + 1);
        spec.stations.push_back({b + d * (radius * std::sin(phi)), radius * std::cos(phi)});
    }
    return spec;
}

LatheSpec sphere(const Vec3& center, double radius, int segments, int rings,
                 const std::array<double, 4>& chart) {
    LatheSpec spec;
    const Vec3 d(0, 1, 0);
    spec.u_dir = d.unitOrthogonal();
    spec.w_dir = d.cross(spec.u_dir);
    spec.segments = segments;
    spec.chart = chart;
    spec.pole_bottom = center - d * radius;
    spec.pole_top = center + d * radius;
    for (int i = 1; i <= rings; ++i) {
        const double phi = -M_PI / 2.0 + M_PI * i / (rings + 1);
        spec.stations.push_back({center + d * (radius * std::sin(phi)), radius * std::cos(phi)});
    }
    return spec;
}

struct Skeleton {
    // Rest-pose pivots and dimensions, already shape-scaled.
    Vec3 shoulder[2], elbow[2], hip[2], knee[2];
    double arm_radius, forearm_radius, leg_radius, shin_radius;
    double upper_arm_len, forearm_len, thigh_len, shin_len;
    double torso_top, torso_radius, head_radius;
    Vec3 head_center;
};

Skeleton make_skeleton(const Eigen::VectorXd& shape) {
    const double st = 1.0 + shape[0]; // torso
    const double sh = 1.0 + shape[1]; // head
    const double sal = 1.0 + shape[2], sar = 1.0 + shape[3];
    const double sll = 1.0 + shape[4], slr = 1.0 + shape[5];

    Skeleton sk;
    sk.torso_top = 0.55 * st;
    sk.torso_radius = 0.15 * st;
    sk.head_radius = 0.11 * sh;
    sk.head_center = Vec3(0, sk.torso_top + 0.05 + sk.head_radius, 0);
    sk.upper_arm_len = 0.26 * sal;
    sk.forearm_len = 0.25 * sal;
    sk.arm_radius = 0.050 * sar;
    sk.forearm_radius = 0.044 * sar;
    sk.thigh_len = 0.40 * sll;
    sk.shin_len = 0.38 * sll;
    sk.leg_radius = 0.070 * slr;
    sk.shin_radius = 0.055 * slr;
    for (int side = 0; side < 2; ++side) {
        const double sx = side == 0 ? -1.0 : 1.0; // 0 = left (-x)
        sk.shoulder[side] = Vec3(sx * 0.19 * st, 0.48 * st, 0);
        sk.elbow[side] = sk.shoulder[side] + Vec3(sx * sk.upper_arm_len, 0, 0);
        sk.hip[side] = Vec3(sx * 0.09 * st, 0, 0);
        sk.knee[side] = sk.hip[side] + Vec3(0, -sk.thigh_len, 0);
    }
    return sk;
}

struct Tessellation {
    int segments, cap_rings, cyl_rings, sphere_rings;
};

Tessellation tessellation_for(int resolution) {
    return {10 * resolution, 2 * resolution, 3 * resolution, 4 * resolution + 1};
}

// Rest-pose part surfaces in world coordinates, in fixed part order.
std::vector<LatheSpec> rest_parts(const Skeleton& sk, int resolution) {
    const Tessellation t = tessellation_for(resolution);
    std::vector<LatheSpec> parts;
    parts.push_back(capsule(Vec3(0, 0, 0), Vec3(0, sk.torso_top, 0), sk.torso_radius, t.segments,
                            t.cap_rings, t.cyl_rings, body_chart_rect(0)));
    parts.push_back(sphere(sk.head_center, sk.head_radius, t.segments, t.sphere_rings, body_chart_rect(1)));
    for (int side = 0; side < 2; ++side) {
        const double sx = side == 0 ? -1.0 : 1.0;
        parts.push_back(capsule(sk.shoulder[side], sk.elbow[side], sk.arm_radius, t.segments, t.cap_rings,
                                t.cyl_rings, body_chart_rect(2 + 2 * side)));
        parts.push_back(capsule(sk.elbow[side], sk.elbow[side] + Vec3(sx * sk.forearm_len, 0, 0),
                                sk.forearm_radius, t.segments, t.cap_rings, t.cyl_rings,
                                body_chart_rect(3 + 2 * side)));
    }
    for (int side = 0; side < 2; ++side) {
        parts.push_back(capsule(sk.hip[side], sk.knee[side], sk.leg_radius, t.segments, t.cap_rings,
                                t.cyl_rings, body_chart_rect(6 + 2 * side)));
        parts.push_back(capsule(sk.knee[side], sk.knee[side] + Vec3(0, -sk.shin_len, 0), sk.shin_radius,
                                t.segments, t.cap_rings, t.cyl_rings, body_chart_rect(7 + 2 * side)));
    }
    return parts;
}

using Rot = Eigen::AngleAxisd;

// Rigid transform v -> pivot + R (v - pivot).
struct PivotRot {
    Vec3 pivot;
    Eigen::Matrix3d rot;
    Vec3 apply(const Vec3& v) const { return pivot + rot * (v - pivot); }
};

} // namespace

std::array<double, 4> body_chart_rect(int part_index) {
    // 4 x 3 grid of cells with an 8% margin on each side.
    const int col = part_index % 4;
    const int row = part_index / 4;
    const double cw = 0.25, ch = 1.0 / 3.0, margin = 0.08;
    return {col * cw + margin * cw, row * ch + margin * ch, (col + 1) * cw - margin * cw,
            (row + 1) * ch - margin * ch};
}

Mesh generate_synthetic_body(const Eigen::VectorXd& pose, const Eigen::VectorXd& shape, int resolution) {
    if (pose.size() != kBodyPoseParams)
        throw ValidationError("generate_synthetic_body: expected " + std::to_string(kBodyPoseParams) +
                              " pose parameters, got " + std::to_string(pose.size()));
    if (shape.size() != kBodyShapeParams)
        throw ValidationError("generate_synthetic_body: expected " + std::to_string(kBodyShapeParams) +
                              " shape parameters, got " + std::to_string(shape.size()));
    if (resolution < 1 || resolution > 8)
        throw ValidationError("generate_synthetic_body: resolution out of range [1,8]");
    for (int i = 0; i < pose.size(); ++i)
        if (!(std::abs(pose[i]) <= M_PI / 2 + 1e-12))
            throw ValidationError("generate_synthetic_body: pose angle " + std::to_string(i) +
                                  " outside [-pi/2, pi/2]");
    for (int i = 0; i < shape.size(); ++i)
        if (!(std::abs(shape[i]) <= 0.4))
            throw ValidationError("generate_synthetic_body: shape offset " + std::to_string(i) +
                                  " outside [-0.4, 0.4]");

    const Skeleton sk = make_skeleton(shape);
    const std::vector<LatheSpec> parts = rest_parts(sk, resolution);

    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<std::array<Vec2, 3>> uvs;
    std::vector<std::pair<int, int>> part_ranges;
    for (const auto& part : parts) {
        const int begin = static_cast<int>(vertices.size());
        append_lathe(part, vertices, faces, uvs);
        part_ranges.emplace_back(begin, static_cast<int>(vertices.size()));
    }

    // Forward kinematics: [shoulder_l, elbow_l, shoulder_r, elbow_r,
    //                      hip_l, knee_l, hip_r, knee_r].
    const Vec3 z(0, 0, 1), x(1, 0, 0);
    for (int side = 0; side < 2; ++side) {
        const PivotRot shoulder{sk.shoulder[side], Rot(pose[0 + 2 * side], z).toRotationMatrix()};
        const PivotRot elbow{sk.elbow[side], Rot(pose[1 + 2 * side], z).toRotationMatrix()};
        const auto [ua_begin, ua_end] = part_ranges[2 + 2 * side];
        for (int i = ua_begin; i < ua_end; ++i) vertices[i] = shoulder.apply(vertices[i]);
        const auto [fa_begin, fa_end] = part_ranges[3 + 2 * side];
        for (int i = fa_begin; i < fa_end; ++i) vertices[i] = shoulder.apply(elbow.apply(vertices[i]));

        const PivotRot hip{sk.hip[side], Rot(pose[4 + 2 * side], x).toRotationMatrix()};
        const PivotRot knee{sk.knee[side], Rot(pose[5 + 2 * side], x).toRotationMatrix()};
        const auto [th_begin, th_end] = part_ranges[6 + 2 * side];
        for (int i = th_begin; i < th_end; ++i) vertices[i] = hip.apply(vertices[i]);
        const auto [shn_begin, shn_end] = part_ranges[7 + 2 * side];
        for (int i = shn_begin; i < shn_end; ++i) vertices[i] = hip.apply(knee.apply(vertices[i]));
    }

    Mesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(vertices.size()), 3);
    for (std::size_t i = 0; i < vertices.size(); ++i) mesh.vertices.row(static_cast<Eigen::Index>(i)) = vertices[i];
    mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
    for (std::size_t i = 0; i < faces.size(); ++i)
        for (int k = 0; k < 3; ++k) mesh.faces(static_cast<Eigen::Index>(i), k) = faces[i][k];
    mesh.corner_uvs = std::move(uvs);
    return mesh;
}

Mesh body_template(int resolution) {
    return generate_synthetic_body(Eigen::VectorXd::Zero(kBodyPoseParams),
                                   Eigen::VectorXd::Zero(kBodyShapeParams), resolution);
}

std::vector<std::pair<std::string, std::pair<int, int>>> body_part_vertex_ranges(int resolution) {
    const Skeleton sk = make_skeleton(Eigen::VectorXd::Zero(kBodyShapeParams));
    const std::vector<LatheSpec> parts = rest_parts(sk, resolution);
    std::vector<std::pair<std::string, std::pair<int, int>>> ranges;
    int offset = 0;
    for (int p = 0; p < kNumParts; ++p) {
        const int count = 2 + static_cast<int>(parts[p].stations.size()) * parts[p].segments;
        ranges.emplace_back(kPartNames[p], std::make_pair(offset, offset + count));
        offset += count;
    }
    return ranges;
}

TextureAtlas make_body_texture(int size, std::uint64_t seed) {
    if (size < 8) throw ValidationError("make_body_texture: size too small");
    Rng rng(seed);
    // Bright palette per part plus per-part pattern parameters. Patterns are
    // functions of the chart-local coordinates with integer u-periods, so the
    // wrap seam is invisible.
    struct PartStyle {
        double base[3];
        double alt[3];
        int bands;
        int u_period;
    };
    std::vector<PartStyle> styles(kNumParts);
    for (auto& st : styles) {
        for (int c = 0; c < 3; ++c) st.base[c] = rng.uniform(0.35, 0.95);
        for (int c = 0; c < 3; ++c) st.alt[c] = rng.uniform(0.35, 0.95);
        st.bands = 2 + static_cast<int>(rng.uniform_index(5));
        st.u_period = 1 + static_cast<int>(rng.uniform_index(3));
    }

    TextureAtlas atlas;
    atlas.image = Image8(size, size, 3, 0);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) {
            const double u = (j + 0.5) / size;
            const double v = (size - i - 0.5) / size;
            for (int p = 0; p < kNumParts; ++p) {
                const auto r = body_chart_rect(p);
                if (u < r[0] || u > r[2] || v < r[1] || v > r[3]) continue;
                const double lu = (u - r[0]) / (r[2] - r[0]);
                const double lv = (v - r[1]) / (r[3] - r[1]);
                const PartStyle& st = styles[p];
                const double band = 0.5 + 0.5 * std::sin(2.0 * M_PI * (st.bands * lv + st.u_period * lu));
                for (int c = 0; c < 3; ++c) {
                    const double val = st.base[c] * band + st.alt[c] * (1.0 - band);
                    atlas.image.at(i, j, c) =
                        static_cast<std::uint8_t>(std::lround(std::clamp(val, 0.0, 1.0) * 255.0));
                }
                break;
            }
        }
    return atlas;
}

} // namespace meshboost
