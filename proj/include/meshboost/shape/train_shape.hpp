#pragma once

#include <functional>
#include <string>
#include <vector>

#include "meshboost/shape/shape_model.hpp"

namespace meshboost {

struct ShapeTrainConfig {
    ShapeModelDesc desc;
    int num_shapes = 200;
    double val_fraction = 0.15;
    int epochs = 12;
    double learning_rate = 1e-3; // Adam
    int encoder_points = 512;
    int decoder_points = 256;    // template vertices supervised per step, 0 = all

    bool augment_subsample = true;
    double subsample_min_fraction = 0.4;
    bool augment_shift = true;
    double shift_sigma = 0.02;   // global translation, meters
    double jitter_sigma = 0.005; // per-point noise, meters

    double pose_range = M_PI / 3; // sampling ranges for the synthetic bodies
    double shape_range = 0.2;
    int template_resolution = 1;

    std::uint64_t seed = 1;
    std::string log_csv_path;      // optional: epoch,train_mse,val_mse rows
    std::string checkpoint_path;   // optional: written after every epoch
    int checkpoint_every = 0;      // epochs; 0 = off

    void validate() const {
        if (num_shapes < 2) throw ValidationError("ShapeTrainConfig: need at least 2 shapes");
        if (epochs < 1) throw ValidationError("ShapeTrainConfig: epochs must be >= 1");
        if (!(val_fraction > 0.0 && val_fraction < 1.0))
            throw ValidationError("ShapeTrainConfig: val_fraction must be in (0,1)");
    }
};

struct EpochStats {
    int epoch;
    double train_mse;
    double val_mse;
};

struct ShapeTrainResult {
    ShapeModel model;
    std::vector<EpochStats> history;
    double final_train_mse = 0.0;
    double final_val_mse = 0.0;
};

// Supervised training: inputs are augmented surface samples of generated
// bodies, targets are their template-topology vertex positions, loss is MSE
// on positions. Deterministic per seed. Throws NumericalError on divergence
// (after writing the last checkpoint when checkpointing is on).
ShapeTrainResult train_shape_model(const ShapeTrainConfig& cfg);

// Resumes from a checkpoint written by train_shape_model; with an unchanged
// config the run continues exactly as if it had never stopped.
ShapeTrainResult train_shape_model_resume(const ShapeTrainConfig& cfg,
                                          const std::string& checkpoint_path);

} // namespace meshboost
