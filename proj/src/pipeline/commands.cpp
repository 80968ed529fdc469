#include "meshboost/pipeline/commands.hpp"

#include <filesystem>
#include <fstream>

#include "meshboost/core/png_io.hpp"
#include "meshboost/core/rng.hpp"
#include "meshboost/inpaint/train_inpaint.hpp"
#include "meshboost/inpaint/unet.hpp"
#include "meshboost/mesh/holes.hpp"
#include "meshboost/mesh/normals.hpp"
#include "meshboost/mesh/obj_io.hpp"
#include "meshboost/mesh/raster.hpp"
#include "meshboost/mesh/synthetic_body.hpp"
#include "meshboost/shape/train_shape.hpp"
#include "meshboost/texture/masks.hpp"

namespace meshboost {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path.string());
    out << text;
    if (!out) throw IoError("failed writing: " + path.string());
}

json latent_to_json(const LatentCode& code) {
    json j;
    j["n_z"] = code.z.dim(0);
    j["z"] = code.z.data;
    return j;
}

int count_mask(const Image8& mask, std::uint8_t value) {
    int n = 0;
    for (const auto v : mask.data()) n += v == value;
    return n;
}

} // namespace

nlohmann::json cmd_complete(const std::string& input_obj, const std::string& output_obj,
                            const PipelineConfig& cfg) {
    if (cfg.shape_model_path.empty()) throw ValidationError("config: shape_model is required");
    const ShapeModel model =
        load_shape_model(cfg.shape_model_path, cfg.template_resolution, cfg.hires_resolution);
    const TexturedMesh input = load_obj(input_obj);
    if (input.mesh.num_faces() < 1) throw ValidationError("input mesh has no faces");

    CompletionConfig completion;
    completion.encoder_points = cfg.completion_points;
    completion.seed = cfg.seed;
    const auto [estimate, z0] = complete_shape(model, input.mesh, completion);

    RefineConfig refine = cfg.refine;
    refine.seed = cfg.seed;
    const RefineResult refined = refine_latent(model, input.mesh, z0, refine);

    save_obj({refined.mesh, {}}, output_obj);
    const fs::path out(output_obj);
    const fs::path latent_path = out.parent_path() / (out.stem().string() + ".latent.json");
    write_text(latent_path, latent_to_json(refined.code).dump(2));

    json report;
    report["command"] = "complete";
    report["initial_objective"] = refined.initial_objective;
    report["refined_objective"] = refined.final_objective;
    report["iterations_run"] = refined.iterations_run;
    report["output"] = output_obj;
    report["latent"] = latent_path.string();
    return report;
}

nlohmann::json cmd_transfer(const std::string& source_obj, const std::string& target_obj,
                            const std::string& output_png, const PipelineConfig& cfg) {
    const TexturedMesh source = load_obj(source_obj);
    if (source.atlas.image.empty()) throw ValidationError("transfer: source OBJ has no texture");
    TexturedMesh target = load_obj(target_obj);
    if (!target.mesh.has_uvs()) throw ValidationError("transfer: target OBJ has no UVs");
    const Mesh target_with_normals = compute_vertex_normals(target.mesh);

    const TextureAtlas transferred = transfer_texture(source, target_with_normals, cfg.transfer);
    write_png(transferred.image, output_png);

    const Image8 mb =
        rasterize_background_mask(target.mesh, cfg.transfer.atlas_width, cfg.transfer.atlas_height);
    const MaskPair masks = derive_masks(transferred, mb, cfg.mask_threshold_black);
    json report;
    report["command"] = "transfer";
    report["foreground_texels"] = count_mask(mb, 255);
    report["missing_texels"] = count_mask(masks.missing, 0);
    report["output"] = output_png;
    return report;
}

nlohmann::json cmd_mask(const std::string& atlas_png, const std::string& background_src,
                        bool background_is_mesh, const std::string& out_mask_png,
                        const std::string& out_background_png, const std::string& out_viz_png,
                        const PipelineConfig& cfg) {
    TextureAtlas atlas;
    atlas.image = read_png(atlas_png, 3);
    Image8 mb;
    if (background_is_mesh) {
        const TexturedMesh mesh = load_obj(background_src);
        if (!mesh.mesh.has_uvs()) throw ValidationError("mask: mesh has no UVs");
        mb = rasterize_background_mask(mesh.mesh, atlas.width(), atlas.height());
    } else {
        mb = read_png(background_src, 1);
    }
    const MaskPair masks = derive_masks(atlas, mb, cfg.mask_threshold_black);

    write_png(masks.missing, out_mask_png);
    if (!out_background_png.empty()) write_png(masks.background, out_background_png);
    if (!out_viz_png.empty()) write_png(apply_masks_to_image(atlas, masks), out_viz_png);

    json report;
    report["command"] = "mask";
    report["missing_texels"] = count_mask(masks.missing, 0);
    report["foreground_texels"] = count_mask(masks.background, 255);
    report["output_mask"] = out_mask_png;
    return report;
}

nlohmann::json cmd_inpaint(const std::string& atlas_png, const std::string& mask_png,
                           const std::string& background_png, const std::string& output_png,
                           const PipelineConfig& cfg) {
    if (cfg.inpaint_model_path.empty()) throw ValidationError("config: inpaint_model is required");
    const inpaint::InpaintNet net = inpaint::load_inpaint_net(cfg.inpaint_model_path);
    TextureAtlas atlas;
    atlas.image = read_png(atlas_png, 3);
    const Image8 missing = read_png(mask_png, 1);
    const Image8 background = read_png(background_png, 1);

    const inpaint::MaskedImage input = inpaint::to_masked_image(atlas, missing, background);
    const TextureAtlas result = inpaint::unet_inpaint(net, input);
    write_png(result.image, output_png);

    json report;
    report["command"] = "inpaint";
    report["inpainted_texels"] = count_mask(missing, 0);
    report["output"] = output_png;
    return report;
}

nlohmann::json cmd_pipeline(const std::string& input_obj, const std::string& outdir,
                            const PipelineConfig& cfg) {
    // Validate and load everything before the first write.
    if (cfg.shape_model_path.empty()) throw ValidationError("config: shape_model is required");
    if (cfg.inpaint_model_path.empty()) throw ValidationError("config: inpaint_model is required");
    const ShapeModel model =
        load_shape_model(cfg.shape_model_path, cfg.template_resolution, cfg.hires_resolution);
    const inpaint::InpaintNet net = inpaint::load_inpaint_net(cfg.inpaint_model_path);
    const TexturedMesh input = load_obj(input_obj);
    input.validate();

    fs::create_directories(outdir);
    const fs::path dir(outdir);
    json report;
    report["command"] = "pipeline";
    report["input"] = input_obj;

    // Stage 1: shape completion.
    CompletionConfig completion;
    completion.encoder_points = cfg.completion_points;
    completion.seed = cfg.seed;
    const auto [estimate, z0] = complete_shape(model, input.mesh, completion);
    RefineConfig refine = cfg.refine;
    refine.seed = cfg.seed;
    const RefineResult refined = refine_latent(model, input.mesh, z0, refine);
    save_obj({refined.mesh, {}}, (dir / "01_completed.obj").string());
    write_text(dir / "01_completed.latent.json", latent_to_json(refined.code).dump(2));
    report["complete"] = {{"initial_objective", refined.initial_objective},
                          {"refined_objective", refined.final_objective},
                          {"iterations_run", refined.iterations_run}};

    // Stage 2: texture transfer.
    const Mesh target = compute_vertex_normals(refined.mesh);
    const TextureAtlas transferred = transfer_texture(input, target, cfg.transfer);
    write_png(transferred.image, (dir / "02_transferred.png").string());

    // Stage 3: masks.
    const Image8 mb =
        rasterize_background_mask(refined.mesh, cfg.transfer.atlas_width, cfg.transfer.atlas_height);
    const MaskPair masks = derive_masks(transferred, mb, cfg.mask_threshold_black);
    write_png(masks.missing, (dir / "03_mask.png").string());
    write_png(masks.background, (dir / "03_background.png").string());
    write_png(apply_masks_to_image(transferred, masks), (dir / "03_viz.png").string());
    report["mask"] = {{"missing_texels", count_mask(masks.missing, 0)},
                      {"foreground_texels", count_mask(masks.background, 255)}};

    // Stage 4: inpainting.
    const inpaint::MaskedImage masked =
        inpaint::to_masked_image(transferred, masks.missing, masks.background);
    const TextureAtlas final_atlas = inpaint::unet_inpaint(net, masked);
    write_png(final_atlas.image, (dir / "04_inpainted.png").string());

    // Final textured result.
    TexturedMesh result{refined.mesh, final_atlas};
    save_obj(result, (dir / "05_result.obj").string());

    write_text(dir / "report.json", report.dump(2));
    return report;
}

SynthConfig SynthConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("synth config: ") + e.what());
    }
    SynthConfig cfg;
    cfg.train_count = j.value("train_count", cfg.train_count);
    cfg.val_count = j.value("val_count", cfg.val_count);
    cfg.eval_count = j.value("eval_count", cfg.eval_count);
    cfg.atlas_size = j.value("atlas_size", cfg.atlas_size);
    cfg.hole_count = j.value("hole_count", cfg.hole_count);
    cfg.hole_radius_min = j.value("hole_radius_min", cfg.hole_radius_min);
    cfg.hole_radius_max = j.value("hole_radius_max", cfg.hole_radius_max);
    cfg.pose_range = j.value("pose_range", cfg.pose_range);
    cfg.shape_range = j.value("shape_range", cfg.shape_range);
    cfg.template_resolution = j.value("template_resolution", cfg.template_resolution);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

nlohmann::json cmd_synth(const SynthConfig& cfg, const std::string& outdir) {
    if (cfg.train_count < 0 || cfg.val_count < 0 || cfg.eval_count < 0)
        throw ValidationError("synth: negative split size");
    const fs::path dir(outdir);
    fs::create_directories(dir);

    json manifest;
    manifest["seed"] = cfg.seed;
    const char* split_names[3] = {"train", "val", "eval"};
    const int counts[3] = {cfg.train_count, cfg.val_count, cfg.eval_count};

    for (int split = 0; split < 3; ++split) {
        fs::create_directories(dir / split_names[split]);
        json entries = json::array();
        for (int i = 0; i < counts[split]; ++i) {
            const std::uint64_t tag = mix_seed(cfg.seed, static_cast<std::uint64_t>(split + 1),
                                               static_cast<std::uint64_t>(i));
            Rng rng(tag);
            Eigen::VectorXd pose(kBodyPoseParams), shape(kBodyShapeParams);
            for (int k = 0; k < kBodyPoseParams; ++k) pose[k] = rng.uniform(-cfg.pose_range, cfg.pose_range);
            for (int k = 0; k < kBodyShapeParams; ++k)
                shape[k] = rng.uniform(-cfg.shape_range, cfg.shape_range);
            const TexturedMesh complete{generate_synthetic_body(pose, shape, cfg.template_resolution),
                                        make_body_texture(cfg.atlas_size, mix_seed(tag, 2))};
            const HoleSpec holes{mix_seed(tag, 3), cfg.hole_count, cfg.hole_radius_min,
                                 cfg.hole_radius_max};
            const TexturedMesh partial = cut_holes(complete, holes);

            char name[64];
            std::snprintf(name, sizeof(name), "scan_%03d", i);
            json entry;
            entry["id"] = name;
            const fs::path split_dir = dir / split_names[split];
            if (split != 2) { // ground truth withheld from eval
                const std::string complete_path = (split_dir / (std::string(name) + ".obj")).string();
                save_obj(complete, complete_path);
                entry["complete"] = complete_path;
            }
            const std::string partial_path = (split_dir / (std::string(name) + "_partial.obj")).string();
            save_obj(partial, partial_path);
            entry["partial"] = partial_path;
            entries.push_back(entry);
        }
        manifest["splits"][split_names[split]] = entries;
    }
    write_text(dir / "manifest.json", manifest.dump(2));

    json report;
    report["command"] = "synth";
    report["outdir"] = outdir;
    report["train"] = cfg.train_count;
    report["val"] = cfg.val_count;
    report["eval"] = cfg.eval_count;
    return report;
}

nlohmann::json cmd_render(const std::string& input_obj, const std::string& output_png,
                          const RenderConfig& cfg) {
    const TexturedMesh mesh = load_obj(input_obj);
    const Image8 image = render_mesh(mesh, cfg);
    write_png(image, output_png);
    json report;
    report["command"] = "render";
    report["output"] = output_png;
    return report;
}

nlohmann::json cmd_train_shape(const std::string& config_json, const std::string& outdir) {
    std::ifstream in(config_json);
    if (!in) throw IoError("cannot open config: " + config_json);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("train-shape config: ") + e.what());
    }

    ShapeTrainConfig cfg;
    if (j.contains("desc")) {
        const auto& d = j.at("desc");
        cfg.desc.encoder_mlp = d.value("encoder_mlp", cfg.desc.encoder_mlp);
        cfg.desc.encoder_dense = d.value("encoder_dense", cfg.desc.encoder_dense);
        cfg.desc.n_z = d.value("n_z", cfg.desc.n_z);
        cfg.desc.decoder_mlp = d.value("decoder_mlp", cfg.desc.decoder_mlp);
    }
    cfg.num_shapes = j.value("num_shapes", cfg.num_shapes);
    cfg.val_fraction = j.value("val_fraction", cfg.val_fraction);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.encoder_points = j.value("encoder_points", cfg.encoder_points);
    cfg.decoder_points = j.value("decoder_points", cfg.decoder_points);
    if (j.contains("augment")) {
        const auto& a = j.at("augment");
        cfg.augment_subsample = a.value("subsample", cfg.augment_subsample);
        cfg.subsample_min_fraction = a.value("subsample_min_fraction", cfg.subsample_min_fraction);
        cfg.augment_shift = a.value("shift", cfg.augment_shift);
        cfg.shift_sigma = a.value("shift_sigma", cfg.shift_sigma);
        cfg.jitter_sigma = a.value("jitter_sigma", cfg.jitter_sigma);
    }
    cfg.pose_range = j.value("pose_range", cfg.pose_range);
    cfg.shape_range = j.value("shape_range", cfg.shape_range);
    cfg.template_resolution = j.value("template_resolution", cfg.template_resolution);
    cfg.seed = j.value("seed", cfg.seed);

    const fs::path dir(outdir);
    fs::create_directories(dir);
    cfg.log_csv_path = (dir / "train_shape.csv").string();
    cfg.checkpoint_path = (dir / "checkpoint.w3b").string();
    cfg.checkpoint_every = j.value("checkpoint_every", 0);

    const ShapeTrainResult result = train_shape_model(cfg);
    save_shape_model(result.model, (dir / "shape.w3b").string());

    json summary;
    summary["command"] = "train-shape";
    summary["model"] = (dir / "shape.w3b").string();
    summary["epochs"] = cfg.epochs;
    summary["final_train_mse"] = result.final_train_mse;
    summary["final_val_mse"] = result.final_val_mse;
    summary["tau_train"] = result.model.tau_train;
    write_text(dir / "summary.json", summary.dump(2));
    return summary;
}

nlohmann::json cmd_train_inpaint(const std::string& config_json, const std::string& outdir) {
    std::ifstream in(config_json);
    if (!in) throw IoError("cannot open config: " + config_json);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("train-inpaint config: ") + e.what());
    }

    inpaint::InpaintTrainConfig cfg;
    if (j.contains("desc")) {
        const auto& d = j.at("desc");
        cfg.desc.in_channels = d.value("in_channels", cfg.desc.in_channels);
        cfg.desc.channels = d.value("channels", cfg.desc.channels);
        cfg.desc.use_background_mask = d.value("use_background_mask", cfg.desc.use_background_mask);
    }
    const std::string strategy = j.value("strategy", "scratch");
    if (strategy == "scratch")
        cfg.strategy = inpaint::TrainStrategy::FromScratch;
    else if (strategy == "pretrain_finetune")
        cfg.strategy = inpaint::TrainStrategy::PretrainThenFinetune;
    else
        throw ParseError("strategy must be 'scratch' or 'pretrain_finetune'");

    const auto corpus_from = [](const json& c, inpaint::InpaintCorpusConfig base) {
        base.num_images = c.value("num_images", base.num_images);
        base.image_size = c.value("image_size", base.image_size);
        const std::string mode = c.value("mask_mode", "blobs");
        if (mode == "blobs")
            base.mask_mode = inpaint::MaskMode::Blobs;
        else if (mode == "mesh")
            base.mask_mode = inpaint::MaskMode::MeshHoles;
        else
            throw ParseError("mask_mode must be 'blobs' or 'mesh'");
        base.seed = c.value("seed", base.seed);
        return base;
    };
    if (j.contains("corpus")) cfg.corpus = corpus_from(j.at("corpus"), cfg.corpus);
    if (j.contains("pretrain_corpus"))
        cfg.pretrain_corpus = corpus_from(j.at("pretrain_corpus"), cfg.pretrain_corpus);
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.pretrain_iterations = j.value("pretrain_iterations", cfg.pretrain_iterations);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    if (j.contains("loss")) {
        const auto& l = j.at("loss");
        cfg.loss.hole = l.value("hole", cfg.loss.hole);
        cfg.loss.valid = l.value("valid", cfg.loss.valid);
        cfg.loss.style = l.value("style", cfg.loss.style);
        cfg.loss.tv = l.value("tv", cfg.loss.tv);
    }
    cfg.seed = j.value("seed", cfg.seed);

    const fs::path dir(outdir);
    fs::create_directories(dir);
    cfg.log_csv_path = (dir / "train_inpaint.csv").string();

    const inpaint::InpaintTrainResult result = inpaint::train_inpainter(cfg);
    inpaint::save_inpaint_net(result.net, (dir / "inpaint.w3b").string());

    json summary;
    summary["command"] = "train-inpaint";
    summary["model"] = (dir / "inpaint.w3b").string();
    summary["iterations"] = cfg.iterations;
    summary["final_loss"] = result.loss_curve.empty() ? 0.0 : result.loss_curve.back();
    write_text(dir / "summary.json", summary.dump(2));
    return summary;
}

} // namespace meshboost
