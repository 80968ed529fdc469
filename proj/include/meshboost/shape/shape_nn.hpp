#pragma once

#include "meshboost/shape/shape_model.hpp"

// Cache-level forward/backward plumbing shared by training and latent
// refinement.

namespace meshboost {

struct EncoderCache {
    nn::MlpCache<float> mlp;
    nn::MaxPoolCache<float> pool;
    std::vector<nn::DenseCache<float>> dense;
    std::vector<nn::ReluCache<float>> relu;
    bool recorded = false;
};

struct DecoderCache {
    nn::MlpCache<float> mlp;
    int n_vertices = 0;
    bool recorded = false;
};

nn::Tensor points_to_tensor(const PointSet& points);

LatentCode encode_cached(const ShapeModel& model, const nn::Tensor& points, EncoderCache* cache);

// Gradients of a scalar loss with respect to the encoder weights (written
// into `grads`); returns the gradient with respect to the input points.
nn::Tensor encoder_backward_to_weights(const ShapeModel& model, const EncoderCache& cache,
                                       const nn::Tensor& gz, nn::NamedTensors<float>& grads);

// Raw decoded positions [n_v, 3] for an arbitrary template.
nn::Tensor decode_positions_cached(const ShapeModel& model, const LatentCode& z, const Mesh& templ,
                                   DecoderCache* cache);

// Backward from d(loss)/d(positions); optionally fills decoder weight
// gradients; returns d(loss)/dz.
nn::Tensor decoder_backward(const ShapeModel& model, const DecoderCache& cache,
                            const nn::Tensor& gpositions, nn::NamedTensors<float>* weight_grads);

} // namespace meshboost
