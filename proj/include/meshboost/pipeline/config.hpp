#pragma once

#include <string>

#include "meshboost/shape/refine.hpp"
#include "meshboost/texture/transfer.hpp"

namespace meshboost {

// Pipeline-wide configuration, loaded from a JSON document. Every field has
// a default; unknown keys are rejected to catch typos.
struct PipelineConfig {
    std::string shape_model_path;
    std::string inpaint_model_path;
    int template_resolution = 1;
    int hires_resolution = 2;
    RefineConfig refine;
    TransferConfig transfer;
    int mask_threshold_black = 0;
    int completion_points = 2048; // encoder sample count
    std::uint64_t seed = 0;

    static PipelineConfig from_json_text(const std::string& text);
    static PipelineConfig from_json_file(const std::string& path);
    std::string to_json() const;
};

} // namespace meshboost
