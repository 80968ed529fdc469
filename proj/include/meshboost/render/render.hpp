#pragma once

#include <string>

#include "meshboost/core/image.hpp"
#include "meshboost/mesh/mesh.hpp"

namespace meshboost {

// Camera presets: perspective view of the mesh bounding sphere from one of
// four sides, up is +y.
enum class CameraPreset { Front, Back, Left, Right };

CameraPreset camera_preset_from_string(const std::string& name);

struct RenderConfig {
    CameraPreset camera = CameraPreset::Front;
    int width = 512;
    int height = 512;
    double fov_degrees = 45.0;

    void validate() const {
        if (width < 1 || height < 1) throw ValidationError("RenderConfig: resolution must be >= 1");
        if (!(fov_degrees > 1.0 && fov_degrees < 170.0))
            throw ValidationError("RenderConfig: fov out of range");
    }
};

// Deterministic software rasterization: z-buffer, flat shading with a
// headlight (a face looking straight at the camera keeps its texture color
// exactly), bilinear texture lookup when the mesh carries UVs and an atlas,
// gray otherwise. Background is dark gray.
Image8 render_mesh(const TexturedMesh& tm, const RenderConfig& cfg = {});

} // namespace meshboost
