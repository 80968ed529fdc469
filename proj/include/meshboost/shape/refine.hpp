#pragma once

#include "meshboost/shape/shape_model.hpp"

namespace meshboost {

enum class RefineObjective { Directed, Symmetric };

struct RefineConfig {
    int iterations = 200;
    double learning_rate = 1e-2;
    double momentum = 0.9;
    int partial_samples = 8192;   // points sampled from the partial input
    int decoded_samples = 8192;   // surface samples on the decoded template
    bool use_hires_template = true;
    RefineObjective objective = RefineObjective::Directed;
    double tolerance = 0.0;       // min relative improvement; 0 = run all iterations
    int patience = 25;            // iterations without improvement before stopping
    bool gradient_free = false;   // random search fallback (true black-box decoder)
    std::uint64_t seed = 0;

    void validate() const {
        if (iterations < 1) throw ValidationError("RefineConfig: iterations must be >= 1");
        if (partial_samples < 1 || decoded_samples < 1)
            throw ValidationError("RefineConfig: sample counts must be >= 1");
    }
};

struct RefineResult {
    Mesh mesh;            // decode(best z) on the model's base template
    LatentCode code;      // best-objective iterate
    double initial_objective = 0.0;
    double final_objective = 0.0;
    int iterations_run = 0;
};

// Latent refinement: descends on z only (decoder weights frozen), objective
// is the Chamfer distance from the partial surface samples to samples of the
// decoded shape. Returns the best iterate, so final <= initial always.
// Throws NumericalError when the objective turns non-finite.
RefineResult refine_latent(const ShapeModel& model, const Mesh& partial, const LatentCode& z0,
                           const RefineConfig& cfg = {});

struct RefineProbe {
    double value;
    nn::Tensor grad_z; // empty unless want_grad
};

// One evaluation of the refinement objective at a given code, with the same
// sampling scheme refine_latent uses. The gradient holds the nearest-match
// assignment fixed.
RefineProbe refine_objective(const ShapeModel& model, const Mesh& partial, const LatentCode& z,
                             const RefineConfig& cfg, bool want_grad);

} // namespace meshboost
