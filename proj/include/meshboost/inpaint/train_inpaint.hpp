#pragma once

#include <string>
#include <vector>

#include "meshboost/inpaint/loss.hpp"
#include "meshboost/inpaint/unet.hpp"

namespace meshboost::inpaint {

enum class TrainStrategy { FromScratch, PretrainThenFinetune };
enum class MaskMode { Blobs, MeshHoles };

struct InpaintCorpusConfig {
    int num_images = 24;
    int image_size = 64;          // must be divisible by 2^stages
    MaskMode mask_mode = MaskMode::Blobs;
    int blobs_min = 2, blobs_max = 5;
    double blob_radius_min = 0.04, blob_radius_max = 0.12; // fraction of image size
    int mesh_holes = 6;                                     // MaskMode::MeshHoles
    double mesh_hole_radius_min = 0.05, mesh_hole_radius_max = 0.14; // meters
    std::uint64_t seed = 1;
};

struct InpaintTrainConfig {
    InpaintNetDesc desc;
    TrainStrategy strategy = TrainStrategy::FromScratch;
    InpaintCorpusConfig corpus;          // atlas corpus (fine-tuning target)
    InpaintCorpusConfig pretrain_corpus; // generic colored images, background-free
    int iterations = 300;                // on the atlas corpus
    int pretrain_iterations = 300;
    double learning_rate = 1e-3; // Adam
    LossWeights loss;
    std::uint64_t seed = 7;
    std::string log_csv_path; // iteration,loss rows

    // iterations == 0 is allowed under PretrainThenFinetune: the model is
    // trained on the generic corpus only and applied to atlases zero-shot.
    void validate() const {
        if (iterations < 0) throw ValidationError("InpaintTrainConfig: iterations must be >= 0");
        if (iterations == 0 && strategy != TrainStrategy::PretrainThenFinetune)
            throw ValidationError("InpaintTrainConfig: from-scratch training needs iterations >= 1");
        if (corpus.num_images < 1) throw ValidationError("InpaintTrainConfig: empty corpus");
    }
};

struct CorpusItem {
    Tensor image;      // ground truth [3,S,S]
    Tensor missing;    // M with holes (1 on background by convention)
    Tensor background; // M_b
};

// Synthetic texture-atlas corpus: seeded body textures with the template
// chart layout; holes cut either as random irregular blobs inside the
// foreground or by cutting mesh holes and transferring the partial texture.
std::vector<CorpusItem> make_atlas_corpus(const InpaintCorpusConfig& cfg);

// Generic-image stand-in corpus for pretraining: multi-colored composites,
// full-frame foreground, blob holes.
std::vector<CorpusItem> make_generic_corpus(const InpaintCorpusConfig& cfg);

struct InpaintTrainResult {
    InpaintNet net;
    std::vector<double> loss_curve; // per iteration (atlas phase)
};

// Deterministic per seed; throws NumericalError on divergence.
InpaintTrainResult train_inpainter(const InpaintTrainConfig& cfg);

} // namespace meshboost::inpaint
