#pragma once

#include <json.hpp>

#include <string>

#include "meshboost/pipeline/config.hpp"
#include "meshboost/render/render.hpp"

namespace meshboost {

// Library backing of the CLI subcommands. Each command validates its inputs
// before writing anything, emits its artifacts, and returns a machine-
// readable report. Fixed config + seed means byte-identical outputs.

// Shape completion + latent refinement. Writes the completed OBJ and a
// latent-code JSON next to it (<output stem>.latent.json).
nlohmann::json cmd_complete(const std::string& input_obj, const std::string& output_obj,
                            const PipelineConfig& cfg);

// Partial texture transfer onto a completed mesh (template UVs).
nlohmann::json cmd_transfer(const std::string& source_obj, const std::string& target_obj,
                            const std::string& output_png, const PipelineConfig& cfg);

// Missing-texture mask from an atlas. The background mask comes either from
// a PNG or is rasterized from a mesh's UV charts. Optional Fig.-style
// false-color visualization.
nlohmann::json cmd_mask(const std::string& atlas_png, const std::string& background_src,
                        bool background_is_mesh, const std::string& out_mask_png,
                        const std::string& out_background_png, const std::string& out_viz_png,
                        const PipelineConfig& cfg);

// Inpainting of an atlas given both masks.
nlohmann::json cmd_inpaint(const std::string& atlas_png, const std::string& mask_png,
                           const std::string& background_png, const std::string& output_png,
                           const PipelineConfig& cfg);

// Full pipeline: complete -> transfer -> mask -> inpaint; writes every stage
// artifact plus report.json into outdir.
nlohmann::json cmd_pipeline(const std::string& input_obj, const std::string& outdir,
                            const PipelineConfig& cfg);

struct SynthConfig {
    int train_count = 8;
    int val_count = 2;
    int eval_count = 2;
    int atlas_size = 256;
    int hole_count = 6;
    double hole_radius_min = 0.06;
    double hole_radius_max = 0.14;
    double pose_range = M_PI / 3;
    double shape_range = 0.2;
    int template_resolution = 1;
    std::uint64_t seed = 1;

    static SynthConfig from_json_file(const std::string& path);
};

// Synthetic dataset tree: complete ground-truth scans for train/val,
// partial-only eval split, manifest.json.
nlohmann::json cmd_synth(const SynthConfig& cfg, const std::string& outdir);

nlohmann::json cmd_render(const std::string& input_obj, const std::string& output_png,
                          const RenderConfig& cfg);

// Training wrappers. Both read their full config from JSON files and write
// model + CSV curve + summary JSON into outdir.
nlohmann::json cmd_train_shape(const std::string& config_json, const std::string& outdir);
nlohmann::json cmd_train_inpaint(const std::string& config_json, const std::string& outdir);

} // namespace meshboost
