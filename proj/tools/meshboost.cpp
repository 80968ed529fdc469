// meshboost: textured 3D body completion pipeline.
//
// Exit codes: 0 success, 2 input parse/validation, 3 model mismatch,
// 4 numerical failure, 1 other error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "meshboost/core/errors.hpp"
#include "meshboost/pipeline/commands.hpp"

using namespace meshboost;

namespace {

PipelineConfig load_config(const std::string& path, std::uint64_t seed_override, bool seed_set) {
    PipelineConfig cfg = path.empty() ? PipelineConfig{} : PipelineConfig::from_json_file(path);
    if (seed_set) cfg.seed = seed_override;
    return cfg;
}

void emit(const nlohmann::json& report, bool as_json) {
    if (as_json) {
        std::cout << report.dump(2) << "\n";
    } else {
        for (const auto& [key, value] : report.items())
            std::cerr << "  " << key << ": " << value.dump() << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"meshboost: 3D body shape and texture completion"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool as_json = false;
    app.add_option("--config", config_path, "pipeline config JSON")->expected(1);
    app.add_option("--seed", seed, "seed override")->each([&](const std::string&) { seed_set = true; });
    app.add_flag("--json", as_json, "machine-readable report on stdout");

    std::string input, output, source, target, atlas, mask, background, outdir, camera = "front";
    std::string viz, out_background;
    bool background_from_mesh = false;
    int size = 512;

    auto* complete = app.add_subcommand("complete", "complete a partial mesh");
    complete->add_option("--input", input)->required();
    complete->add_option("--output", output)->required();

    auto* transfer = app.add_subcommand("transfer", "transfer partial texture onto a completed mesh");
    transfer->add_option("--source", source)->required();
    transfer->add_option("--target", target)->required();
    transfer->add_option("--output", output)->required();

    auto* mask_cmd = app.add_subcommand("mask", "derive missing/background masks from an atlas");
    mask_cmd->add_option("--atlas", atlas)->required();
    mask_cmd->add_option("--background-source", background,
                         "background mask PNG, or a mesh OBJ with --from-mesh")
        ->required();
    mask_cmd->add_flag("--from-mesh", background_from_mesh, "rasterize the background mask from a mesh");
    mask_cmd->add_option("--out-mask", output)->required();
    mask_cmd->add_option("--out-background", out_background);
    mask_cmd->add_option("--out-viz", viz);

    auto* inpaint = app.add_subcommand("inpaint", "inpaint an atlas");
    inpaint->add_option("--atlas", atlas)->required();
    inpaint->add_option("--mask", mask)->required();
    inpaint->add_option("--background", background)->required();
    inpaint->add_option("--output", output)->required();

    auto* pipeline = app.add_subcommand("pipeline", "run the full pipeline");
    pipeline->add_option("--input", input)->required();
    pipeline->add_option("--outdir", outdir)->required();

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--outdir", outdir)->required();

    auto* render = app.add_subcommand("render", "render a preview PNG");
    render->add_option("--input", input)->required();
    render->add_option("--output", output)->required();
    render->add_option("--camera", camera, "front|back|left|right");
    render->add_option("--size", size);

    auto* train_shape = app.add_subcommand("train-shape", "train the shape completion model");
    train_shape->add_option("--outdir", outdir)->required();

    auto* train_inpaint = app.add_subcommand("train-inpaint", "train the inpainting model");
    train_inpaint->add_option("--outdir", outdir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        nlohmann::json report;
        if (complete->parsed()) {
            report = cmd_complete(input, output, load_config(config_path, seed, seed_set));
        } else if (transfer->parsed()) {
            report = cmd_transfer(source, target, output, load_config(config_path, seed, seed_set));
        } else if (mask_cmd->parsed()) {
            report = cmd_mask(atlas, background, background_from_mesh, output, out_background, viz,
                              load_config(config_path, seed, seed_set));
        } else if (inpaint->parsed()) {
            report = cmd_inpaint(atlas, mask, background, output, load_config(config_path, seed, seed_set));
        } else if (pipeline->parsed()) {
            report = cmd_pipeline(input, outdir, load_config(config_path, seed, seed_set));
        } else if (synth->parsed()) {
            SynthConfig cfg = config_path.empty() ? SynthConfig{} : SynthConfig::from_json_file(config_path);
            if (seed_set) cfg.seed = seed;
            report = cmd_synth(cfg, outdir);
        } else if (render->parsed()) {
            RenderConfig cfg;
            cfg.camera = camera_preset_from_string(camera);
            cfg.width = size;
            cfg.height = size;
            report = cmd_render(input, output, cfg);
        } else if (train_shape->parsed()) {
            if (config_path.empty()) throw ValidationError("train-shape requires --config");
            report = cmd_train_shape(config_path, outdir);
        } else if (train_inpaint->parsed()) {
            if (config_path.empty()) throw ValidationError("train-inpaint requires --config");
            report = cmd_train_inpaint(config_path, outdir);
        }
        emit(report, as_json);
        return 0;
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "shape mismatch: " << e.what() << "\n";
        return 2;
    } catch (const MissingTextureError& e) {
        std::cerr << "missing texture: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
