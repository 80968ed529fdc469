#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "meshboost/mesh/mesh.hpp"

namespace meshboost {

// Articulated capsule-and-ellipsoid humanoid: torso, head, two arms with
// elbow joints, two legs with knee joints. Topology (n_v, n_f) and the UV
// chart layout depend only on `resolution`, never on the parameters.
//
// pose (8 joint angles, radians, |a| <= pi/2):
//   [shoulder_l, elbow_l, shoulder_r, elbow_r, hip_l, knee_l, hip_r, knee_r]
// Arm joints rotate about +z, leg joints about +x. Left is the -x side.
//
// shape (6 offsets, |s| <= 0.4, applied as scale factors 1+s):
//   [torso, head, arm_length, arm_radius, leg_length, leg_radius]
constexpr int kBodyPoseParams = 8;
constexpr int kBodyShapeParams = 6;

Mesh generate_synthetic_body(const Eigen::VectorXd& pose, const Eigen::VectorXd& shape,
                             int resolution = 1);

// Canonical template: all parameters zero.
Mesh body_template(int resolution = 1);

// Named vertex ranges [begin, end) per body part, fixed per resolution.
std::vector<std::pair<std::string, std::pair<int, int>>> body_part_vertex_ranges(int resolution = 1);

// Chart rectangle (u_min, v_min, u_max, v_max) of one part in the atlas.
std::array<double, 4> body_chart_rect(int part_index);

// Seeded colorful atlas matching the template chart layout. Patterns are
// continuous across each chart's wrap seam. Pixels outside chart rectangles
// are exact black.
TextureAtlas make_body_texture(int size, std::uint64_t seed);

} // namespace meshboost
