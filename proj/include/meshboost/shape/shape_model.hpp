#pragma once

#include <optional>
#include <string>

#include "meshboost/mesh/mesh.hpp"
#include "meshboost/metrics/sampling.hpp"
#include "meshboost/nn/layers.hpp"

namespace meshboost {

// Encoder-decoder architecture: a shared point MLP pooled into a latent code
// which is refined by two dense layers; the decoder concatenates the code to
// every template vertex and applies another shared MLP that outputs deformed
// positions.
struct ShapeModelDesc {
    std::vector<int> encoder_mlp = {3, 32, 64, 128}; // feature sizes
    std::vector<int> encoder_dense = {128, 128};     // sizes after pooling
    int n_z = 128;
    std::vector<int> decoder_mlp = {3 + 128, 128, 64, 32, 3};

    // Paper-scale configuration.
    static ShapeModelDesc full_size() {
        ShapeModelDesc d;
        d.encoder_mlp = {3, 64, 128, 1024};
        d.encoder_dense = {1024, 1024};
        d.n_z = 1024;
        d.decoder_mlp = {3 + 1024, 513, 256, 128, 3};
        return d;
    }

    void validate() const;
    std::string to_json() const;
    static ShapeModelDesc from_json(const std::string& text);
};

struct LatentCode {
    nn::Tensor z; // shape [n_z]
};

struct ShapeModel {
    ShapeModelDesc desc;
    nn::NamedTensors<float> weights;
    Mesh template_mesh;                 // S_T, defines output topology and UV layout
    std::optional<Mesh> template_hires; // denser template used by refinement

    // Reported training accuracy: an upper bound on the directed Chamfer
    // distance from a complete input's samples to its reconstruction,
    // measured on the validation set at training time. Zero when untrained.
    double tau_train = 0.0;
};

// Deterministic weight initialization (uniform He-style scaling).
nn::NamedTensors<float> init_shape_weights(const ShapeModelDesc& desc, std::uint64_t seed);

// Shared-MLP chain, max pool, dense head. Permutation-invariant in the rows
// of `points`. Throws on empty input or layer size mismatch.
LatentCode encode(const ShapeModel& model, const PointSet& points);

// Deforms `templ` (defaults to the model template): the code is concatenated
// to every vertex, the decoder MLP maps to deformed positions. The output
// keeps the template faces and UVs.
Mesh decode(const ShapeModel& model, const LatentCode& z, const Mesh* templ = nullptr);

struct CompletionConfig {
    int encoder_points = 2048;
    std::uint64_t seed = 0;
};

// decode(encode(sample_surface(partial))): the first estimate and its code.
std::pair<Mesh, LatentCode> complete_shape(const ShapeModel& model, const Mesh& partial,
                                           const CompletionConfig& cfg = {});

// Weight-file plumbing (format: nn::save_weights / nn::load_weights).
void save_shape_model(const ShapeModel& model, const std::string& path);
ShapeModel load_shape_model(const std::string& path, int template_resolution = 1,
                            int hires_resolution = 2);

} // namespace meshboost
