#include "meshboost/pipeline/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

namespace meshboost {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ParseError("unknown key '" + key + "' in " + where + " configuration");
}

} // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    check_keys(j, {"shape_model", "inpaint_model", "template", "refine", "transfer", "mask",
                   "completion_points", "seed"},
               "pipeline");

    PipelineConfig cfg;
    cfg.shape_model_path = j.value("shape_model", "");
    cfg.inpaint_model_path = j.value("inpaint_model", "");
    cfg.completion_points = j.value("completion_points", cfg.completion_points);
    cfg.seed = j.value("seed", cfg.seed);

    if (j.contains("template")) {
        const auto& t = j.at("template");
        check_keys(t, {"resolution", "hires_resolution"}, "template");
        cfg.template_resolution = t.value("resolution", cfg.template_resolution);
        cfg.hires_resolution = t.value("hires_resolution", cfg.hires_resolution);
    }
    if (j.contains("refine")) {
        const auto& r = j.at("refine");
        check_keys(r,
                   {"iterations", "learning_rate", "momentum", "partial_samples", "decoded_samples",
                    "use_hires_template", "objective", "tolerance", "patience", "gradient_free"},
                   "refine");
        cfg.refine.iterations = r.value("iterations", cfg.refine.iterations);
        cfg.refine.learning_rate = r.value("learning_rate", cfg.refine.learning_rate);
        cfg.refine.momentum = r.value("momentum", cfg.refine.momentum);
        cfg.refine.partial_samples = r.value("partial_samples", cfg.refine.partial_samples);
        cfg.refine.decoded_samples = r.value("decoded_samples", cfg.refine.decoded_samples);
        cfg.refine.use_hires_template = r.value("use_hires_template", cfg.refine.use_hires_template);
        cfg.refine.tolerance = r.value("tolerance", cfg.refine.tolerance);
        cfg.refine.patience = r.value("patience", cfg.refine.patience);
        cfg.refine.gradient_free = r.value("gradient_free", cfg.refine.gradient_free);
        const std::string objective = r.value("objective", "directed");
        if (objective == "directed")
            cfg.refine.objective = RefineObjective::Directed;
        else if (objective == "symmetric")
            cfg.refine.objective = RefineObjective::Symmetric;
        else
            throw ParseError("refine.objective must be 'directed' or 'symmetric'");
    }
    if (j.contains("transfer")) {
        const auto& t = j.at("transfer");
        check_keys(t, {"max_ray_distance", "bidirectional", "atlas_width", "atlas_height"}, "transfer");
        cfg.transfer.max_ray_distance = t.value("max_ray_distance", cfg.transfer.max_ray_distance);
        cfg.transfer.bidirectional = t.value("bidirectional", cfg.transfer.bidirectional);
        cfg.transfer.atlas_width = t.value("atlas_width", cfg.transfer.atlas_width);
        cfg.transfer.atlas_height = t.value("atlas_height", cfg.transfer.atlas_height);
    }
    if (j.contains("mask")) {
        const auto& m = j.at("mask");
        check_keys(m, {"threshold_black"}, "mask");
        cfg.mask_threshold_black = m.value("threshold_black", cfg.mask_threshold_black);
    }
    cfg.refine.validate();
    cfg.transfer.validate();
    return cfg;
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string PipelineConfig::to_json() const {
    json j;
    j["shape_model"] = shape_model_path;
    j["inpaint_model"] = inpaint_model_path;
    j["template"] = {{"resolution", template_resolution}, {"hires_resolution", hires_resolution}};
    j["completion_points"] = completion_points;
    j["seed"] = seed;
    j["refine"] = {{"iterations", refine.iterations},
                   {"learning_rate", refine.learning_rate},
                   {"momentum", refine.momentum},
                   {"partial_samples", refine.partial_samples},
                   {"decoded_samples", refine.decoded_samples},
                   {"use_hires_template", refine.use_hires_template},
                   {"objective", refine.objective == RefineObjective::Directed ? "directed" : "symmetric"},
                   {"tolerance", refine.tolerance},
                   {"patience", refine.patience},
                   {"gradient_free", refine.gradient_free}};
    j["transfer"] = {{"max_ray_distance", transfer.max_ray_distance},
                     {"bidirectional", transfer.bidirectional},
                     {"atlas_width", transfer.atlas_width},
                     {"atlas_height", transfer.atlas_height}};
    j["mask"] = {{"threshold_black", mask_threshold_black}};
    return j.dump(2);
}

} // namespace meshboost
