#pragma once

#include <string>

#include "meshboost/inpaint/partial_conv.hpp"
#include "meshboost/mesh/mesh.hpp"
#include "meshboost/nn/layers.hpp"

namespace meshboost::inpaint {

using nn::Tensor;

// Image plus masks in network layout: image [C,H,W] in [0,1], masks [H,W].
struct MaskedImage {
    Tensor image;
    Tensor missing;     // M: 1 = known
    Tensor background;  // M_b: 1 = foreground

    void validate() const;
};

// UNet of partial convolutions: encoder stages downsample with stride-2
// 3x3 partial convs, decoder stages upsample (nearest) and fuse the skip
// connection through a two-group partial conv. The final stage concatenates
// the network input and emits C channels linearly.
struct InpaintNetDesc {
    int in_channels = 3;
    std::vector<int> channels = {16, 32, 64}; // encoder outputs, shallow to deep
    bool use_background_mask = true;          // off = published baseline form

    // Paper-scale variant (not exercised by the test suite).
    static InpaintNetDesc full_size() {
        InpaintNetDesc d;
        d.channels = {64, 128, 256, 512};
        return d;
    }

    int stages() const { return static_cast<int>(channels.size()); }
    void validate() const;
    std::string to_json() const;
    static InpaintNetDesc from_json(const std::string& text);
};

struct InpaintNet {
    InpaintNetDesc desc;
    nn::NamedTensors<float> weights;
};

nn::NamedTensors<float> init_inpaint_weights(const InpaintNetDesc& desc, std::uint64_t seed);

// Forward caches for training.
struct UnetCache {
    std::vector<PConvCache<float>> enc_conv;
    std::vector<nn::ReluCache<float>> enc_relu;
    std::vector<PConvCache<float>> dec_conv;
    std::vector<nn::ReluCache<float>> dec_relu;
    std::vector<int> enc_h, enc_w;   // feature sizes per level (input level first)
    bool recorded = false;
};

// Raw network prediction [C,H,W] (no compositing, no clamping).
Tensor unet_forward(const InpaintNet& net, const MaskedImage& input, UnetCache* cache = nullptr);

// Backward from d(loss)/d(prediction): fills weight gradients, returns
// d(loss)/d(input image).
Tensor unet_backward(const InpaintNet& net, const UnetCache& cache, const Tensor& gpred,
                     nn::NamedTensors<float>* weight_grads);

// Composite: known foreground texels copy the input, missing texels take the
// prediction, background is black; clamped to [0,1].
Tensor composite_prediction(const MaskedImage& input, const Tensor& pred);

// Full inference: forward + composite, quantized to 8-bit.
TextureAtlas unet_inpaint(const InpaintNet& net, const MaskedImage& input);

// Conversions between image/mask types and network tensors.
MaskedImage to_masked_image(const TextureAtlas& atlas, const Image8& missing, const Image8& background);
Image8 tensor_to_image(const Tensor& t); // [C,H,W] in [0,1] -> 8-bit

void save_inpaint_net(const InpaintNet& net, const std::string& path);
InpaintNet load_inpaint_net(const std::string& path);

} // namespace meshboost::inpaint
