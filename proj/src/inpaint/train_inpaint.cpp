#include "meshboost/inpaint/train_inpaint.hpp"

#include <cmath>
#include <fstream>

#include "meshboost/core/rng.hpp"
#include "meshboost/mesh/holes.hpp"
#include "meshboost/mesh/normals.hpp"
#include "meshboost/mesh/raster.hpp"
#include "meshboost/mesh/synthetic_body.hpp"
#include "meshboost/nn/optimizer.hpp"
#include "meshboost/texture/masks.hpp"
#include "meshboost/texture/transfer.hpp"

namespace meshboost::inpaint {

namespace {

// Random blob holes inside the foreground: unions of disks around seeded
// centers, clipped to {M_b=1}.
Tensor blob_mask(Rng& rng, const Tensor& background, const InpaintCorpusConfig& cfg) {
    const int h = background.dim(0), w = background.dim(1);
    Tensor m({h, w}, 1.0f);
    const int blobs =
        cfg.blobs_min + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(
                            std::max(1, cfg.blobs_max - cfg.blobs_min + 1))));
    for (int bi = 0; bi < blobs; ++bi) {
        // Center on a foreground pixel so the blob actually bites.
        int ci = 0, cj = 0;
        for (int attempt = 0; attempt < 100; ++attempt) {
            ci = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(h)));
            cj = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(w)));
            if (background.data[static_cast<std::size_t>(ci) * w + cj] == 1.0f) break;
        }
        const double radius = rng.uniform(cfg.blob_radius_min, cfg.blob_radius_max) * std::min(h, w);
        const int r = static_cast<int>(std::ceil(radius));
        for (int i = std::max(0, ci - r); i <= std::min(h - 1, ci + r); ++i)
            for (int j = std::max(0, cj - r); j <= std::min(w - 1, cj + r); ++j) {
                const double d2 = static_cast<double>(i - ci) * (i - ci) +
                                  static_cast<double>(j - cj) * (j - cj);
                if (d2 <= radius * radius &&
                    background.data[static_cast<std::size_t>(i) * w + j] == 1.0f)
                    m.data[static_cast<std::size_t>(i) * w + j] = 0.0f;
            }
    }
    return m;
}

Tensor image_to_tensor(const Image8& img) {
    Tensor t({img.channels(), img.height(), img.width()});
    for (int c = 0; c < img.channels(); ++c)
        for (int i = 0; i < img.height(); ++i)
            for (int j = 0; j < img.width(); ++j)
                t.data[(static_cast<std::size_t>(c) * img.height() + i) * img.width() + j] =
                    static_cast<float>(img.at(i, j, c)) / 255.0f;
    return t;
}

Tensor mask_to_tensor(const Image8& img) {
    Tensor t({img.height(), img.width()});
    for (int i = 0; i < img.height(); ++i)
        for (int j = 0; j < img.width(); ++j)
            t.data[static_cast<std::size_t>(i) * img.width() + j] = img.at(i, j) != 0 ? 1.0f : 0.0f;
    return t;
}

} // namespace

std::vector<CorpusItem> make_atlas_corpus(const InpaintCorpusConfig& cfg) {
    const Mesh templ = body_template(1);
    const Image8 mb_img = rasterize_background_mask(templ, cfg.image_size, cfg.image_size);
    const Tensor mb = mask_to_tensor(mb_img);

    std::vector<CorpusItem> corpus;
    corpus.reserve(cfg.num_images);
    for (int n = 0; n < cfg.num_images; ++n) {
        const std::uint64_t item_seed = mix_seed(cfg.seed, 11, static_cast<std::uint64_t>(n));
        CorpusItem item;
        item.background = mb;
        const TextureAtlas atlas = make_body_texture(cfg.image_size, item_seed);
        item.image = image_to_tensor(atlas.image);

        if (cfg.mask_mode == MaskMode::Blobs) {
            Rng rng(mix_seed(cfg.seed, 12, static_cast<std::uint64_t>(n)));
            item.missing = blob_mask(rng, mb, cfg);
        } else {
            // Mesh-derived holes: cut the geometry, transfer its own texture
            // onto the intact template, mark the black foreground texels.
            const TexturedMesh full{templ, atlas};
            const HoleSpec spec{item_seed, cfg.mesh_holes, cfg.mesh_hole_radius_min,
                                cfg.mesh_hole_radius_max};
            const TexturedMesh partial = cut_holes(full, spec);
            const Mesh target = compute_vertex_normals(templ);
            TransferConfig tcfg;
            tcfg.atlas_width = cfg.image_size;
            tcfg.atlas_height = cfg.image_size;
            const TextureAtlas transferred = transfer_texture(partial, target, tcfg);
            const MaskPair masks = derive_masks(transferred, mb_img);
            item.missing = mask_to_tensor(masks.missing);
        }
        corpus.push_back(std::move(item));
    }
    return corpus;
}

std::vector<CorpusItem> make_generic_corpus(const InpaintCorpusConfig& cfg) {
    std::vector<CorpusItem> corpus;
    corpus.reserve(cfg.num_images);
    const int s = cfg.image_size;
    for (int n = 0; n < cfg.num_images; ++n) {
        Rng rng(mix_seed(cfg.seed, 21, static_cast<std::uint64_t>(n)));
        CorpusItem item;
        item.background = Tensor({s, s}, 1.0f);
        item.image = Tensor({3, s, s});
        // Base gradient plus a handful of colored rectangles and disks. The
        // palette spans the full range including near-black, like natural
        // photographs do.
        double base[3], gx[3], gy[3];
        for (int c = 0; c < 3; ++c) {
            base[c] = rng.uniform(0.1, 0.9);
            gx[c] = rng.uniform(-0.3, 0.3);
            gy[c] = rng.uniform(-0.3, 0.3);
        }
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < s; ++i)
                for (int j = 0; j < s; ++j)
                    item.image.data[(static_cast<std::size_t>(c) * s + i) * s + j] =
                        static_cast<float>(std::clamp(
                            base[c] + gx[c] * j / s + gy[c] * i / s, 0.0, 1.0));
        const int shapes = 3 + static_cast<int>(rng.uniform_index(4));
        for (int q = 0; q < shapes; ++q) {
            const bool disk = rng.uniform() < 0.5;
            const int ci = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(s)));
            const int cj = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(s)));
            const int r = 2 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(s / 4)));
            double color[3];
            const bool dark = rng.uniform() < 0.25;
            for (int c = 0; c < 3; ++c) color[c] = dark ? rng.uniform(0.0, 0.1) : rng.uniform(0.1, 1.0);
            for (int i = std::max(0, ci - r); i <= std::min(s - 1, ci + r); ++i)
                for (int j = std::max(0, cj - r); j <= std::min(s - 1, cj + r); ++j) {
                    if (disk && (static_cast<double>(i - ci) * (i - ci) +
                                 static_cast<double>(j - cj) * (j - cj)) > static_cast<double>(r) * r)
                        continue;
                    for (int c = 0; c < 3; ++c)
                        item.image.data[(static_cast<std::size_t>(c) * s + i) * s + j] =
                            static_cast<float>(color[c]);
                }
        }
        Rng mask_rng(mix_seed(cfg.seed, 22, static_cast<std::uint64_t>(n)));
        item.missing = blob_mask(mask_rng, item.background, cfg);
        corpus.push_back(std::move(item));
    }
    return corpus;
}

namespace {

void train_phase(InpaintNet& net, nn::Optimizer& optimizer, const std::vector<CorpusItem>& corpus,
                 const InpaintTrainConfig& cfg, int iterations, std::vector<double>* curve,
                 std::ofstream* csv) {
    for (int it = 0; it < iterations; ++it) {
        const CorpusItem& item = corpus[static_cast<std::size_t>(it) % corpus.size()];

        // Network input: ground truth with holes and background zeroed.
        MaskedImage input;
        input.missing = item.missing;
        input.background = item.background;
        input.image = item.image;
        const int h = input.image.dim(1), w = input.image.dim(2);
        for (int c = 0; c < 3; ++c)
            for (std::int64_t m = 0; m < static_cast<std::int64_t>(h) * w; ++m) {
                const float keep = item.missing.data[static_cast<std::size_t>(m)] *
                                   item.background.data[static_cast<std::size_t>(m)];
                input.image.data[static_cast<std::size_t>(c) * h * w + m] *= keep;
            }

        UnetCache cache;
        const Tensor pred = unet_forward(net, input, &cache);
        const LossResult loss =
            loss_inpaint(pred, item.image, item.missing, item.background, net, cfg.loss, true);
        if (!std::isfinite(loss.total))
            throw NumericalError("train_inpainter: divergence (non-finite loss) at iteration " +
                                 std::to_string(it));
        if (curve) curve->push_back(loss.total);
        if (csv && csv->is_open()) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%d,%.9g\n", it, loss.total);
            *csv << buf;
        }

        nn::NamedTensors<float> grads;
        unet_backward(net, cache, loss.grad_pred, &grads);
        optimizer.step(net.weights, grads);
    }
}

} // namespace

InpaintTrainResult train_inpainter(const InpaintTrainConfig& cfg) {
    cfg.validate();
    cfg.desc.validate();

    InpaintTrainResult result;
    result.net.desc = cfg.desc;
    result.net.weights = init_inpaint_weights(cfg.desc, mix_seed(cfg.seed, 1));
    nn::Optimizer optimizer({nn::OptimMethod::Adam, cfg.learning_rate});

    std::ofstream csv;
    if (!cfg.log_csv_path.empty()) {
        csv.open(cfg.log_csv_path);
        if (!csv) throw IoError("cannot open training log: " + cfg.log_csv_path);
        csv << "iteration,loss\n";
    }

    if (cfg.strategy == TrainStrategy::PretrainThenFinetune) {
        const auto generic = make_generic_corpus(cfg.pretrain_corpus);
        train_phase(result.net, optimizer, generic, cfg, cfg.pretrain_iterations, nullptr, nullptr);
    }
    const auto corpus = make_atlas_corpus(cfg.corpus);
    train_phase(result.net, optimizer, corpus, cfg, cfg.iterations, &result.loss_curve, &csv);
    return result;
}

} // namespace meshboost::inpaint
