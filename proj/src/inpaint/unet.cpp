#include "meshboost/inpaint/unet.hpp"

#include <json.hpp>

#include <cmath>

#include "meshboost/core/rng.hpp"
#include "meshboost/nn/weights_io.hpp"

namespace meshboost::inpaint {

void MaskedImage::validate() const {
    nn::require_ndim(image, 3, "MaskedImage image");
    nn::require_shape(missing, {image.dim(1), image.dim(2)}, "MaskedImage missing mask");
    nn::require_shape(background, {image.dim(1), image.dim(2)}, "MaskedImage background mask");
    require_binary(missing, "MaskedImage missing");
    require_binary(background, "MaskedImage background");
}

void InpaintNetDesc::validate() const {
    if (in_channels < 1) throw ValidationError("InpaintNetDesc: in_channels must be >= 1");
    if (channels.empty()) throw ValidationError("InpaintNetDesc: need at least one stage");
    for (int c : channels)
        if (c < 1) throw ValidationError("InpaintNetDesc: channel counts must be >= 1");
}

std::string InpaintNetDesc::to_json() const {
    nlohmann::json j;
    j["kind"] = "inpaint_net";
    j["in_channels"] = in_channels;
    j["channels"] = channels;
    j["use_background_mask"] = use_background_mask;
    return j.dump();
}

InpaintNetDesc InpaintNetDesc::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("kind", "") != "inpaint_net") throw ModelError("descriptor is not an inpaint net");
    InpaintNetDesc d;
    d.in_channels = j.at("in_channels").get<int>();
    d.channels = j.at("channels").get<std::vector<int>>();
    d.use_background_mask = j.at("use_background_mask").get<bool>();
    d.validate();
    return d;
}

namespace {

constexpr int kKernel = 3;

Tensor he_uniform(Rng& rng, int fan_in, std::vector<int> shape) {
    Tensor t(std::move(shape));
    const double limit = std::sqrt(6.0 / fan_in);
    for (auto& v : t.data) v = static_cast<float>(rng.uniform(-limit, limit));
    return t;
}

// Nearest-neighbor 2x upsampling of a [C,h,w] tensor.
Tensor upsample2(const Tensor& x) {
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor out({c, 2 * h, 2 * w});
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < 2 * h; ++i)
            for (int j = 0; j < 2 * w; ++j)
                out.data[(static_cast<std::size_t>(ci) * 2 * h + i) * 2 * w + j] =
                    x.data[(static_cast<std::size_t>(ci) * h + i / 2) * w + j / 2];
    return out;
}

Tensor upsample2_mask(const Tensor& m) {
    const int h = m.dim(0), w = m.dim(1);
    Tensor out({2 * h, 2 * w});
    for (int i = 0; i < 2 * h; ++i)
        for (int j = 0; j < 2 * w; ++j)
            out.data[static_cast<std::size_t>(i) * 2 * w + j] = m.data[static_cast<std::size_t>(i / 2) * w + j / 2];
    return out;
}

// Adjoint of upsample2: sums gradients over each 2x2 block.
Tensor downsample_grad(const Tensor& g, int h, int w) {
    const int c = g.dim(0);
    Tensor out({c, h, w});
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < g.dim(1); ++i)
            for (int j = 0; j < g.dim(2); ++j)
                out.data[(static_cast<std::size_t>(ci) * h + i / 2) * w + j / 2] +=
                    g.data[(static_cast<std::size_t>(ci) * g.dim(1) + i) * g.dim(2) + j];
    return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.data.size());
    return out;
}

Tensor ones_like_mask(int h, int w) { return Tensor({h, w}, 1.0f); }

} // namespace

nn::NamedTensors<float> init_inpaint_weights(const InpaintNetDesc& desc, std::uint64_t seed) {
    desc.validate();
    Rng rng(seed);
    nn::NamedTensors<float> w;
    int prev = desc.in_channels;
    for (int s = 0; s < desc.stages(); ++s) {
        const int cout = desc.channels[static_cast<std::size_t>(s)];
        w.emplace("enc" + std::to_string(s) + ".W",
                  he_uniform(rng, prev * kKernel * kKernel, {cout, prev, kKernel, kKernel}));
        w.emplace("enc" + std::to_string(s) + ".b", Tensor({cout}));
        prev = cout;
    }
    for (int s = desc.stages() - 1; s >= 0; --s) {
        const int skip = s > 0 ? desc.channels[static_cast<std::size_t>(s - 1)] : desc.in_channels;
        const int cin = desc.channels[static_cast<std::size_t>(s)] + skip;
        const int cout = s > 0 ? desc.channels[static_cast<std::size_t>(s - 1)] : desc.in_channels;
        w.emplace("dec" + std::to_string(s) + ".W",
                  he_uniform(rng, cin * kKernel * kKernel, {cout, cin, kKernel, kKernel}));
        w.emplace("dec" + std::to_string(s) + ".b", Tensor({cout}));
    }
    return w;
}

Tensor unet_forward(const InpaintNet& net, const MaskedImage& input, UnetCache* cache) {
    input.validate();
    net.desc.validate();
    const int h = input.image.dim(1), w = input.image.dim(2);
    const int s = net.desc.stages();
    if (h % (1 << s) != 0 || w % (1 << s) != 0)
        throw ShapeError("unet_forward: image " + nn::shape_str(input.image.shape) +
                         " not divisible by 2^" + std::to_string(s));

    const bool bg = net.desc.use_background_mask;
    if (cache) {
        cache->enc_conv.resize(s);
        cache->enc_relu.resize(s);
        cache->dec_conv.resize(s);
        cache->dec_relu.resize(s);
        cache->enc_h.clear();
        cache->enc_w.clear();
    }

    // Encoder. Level 0 holds the network input.
    std::vector<Tensor> features{input.image};
    std::vector<Tensor> masks{input.missing};
    std::vector<Tensor> backgrounds{bg ? input.background : Tensor()};
    if (cache) {
        cache->enc_h.push_back(h);
        cache->enc_w.push_back(w);
    }
    for (int stage = 0; stage < s; ++stage) {
        PConvInput<float> in = make_pconv_input(features.back(), masks.back(), backgrounds.back());
        PConvOutput<float> out =
            partial_conv_forward(in, net.weights.at("enc" + std::to_string(stage) + ".W"),
                                 net.weights.at("enc" + std::to_string(stage) + ".b"), 2, 1,
                                 cache ? &cache->enc_conv[static_cast<std::size_t>(stage)] : nullptr);
        out.y = nn::relu_forward(out.y, cache ? &cache->enc_relu[static_cast<std::size_t>(stage)] : nullptr);
        features.push_back(std::move(out.y));
        masks.push_back(std::move(out.mask));
        backgrounds.push_back(bg ? std::move(out.background) : Tensor());
        if (cache) {
            cache->enc_h.push_back(features.back().dim(1));
            cache->enc_w.push_back(features.back().dim(2));
        }
    }

    // Decoder.
    Tensor current = features.back();
    Tensor current_mask = masks.back();
    for (int stage = s - 1; stage >= 0; --stage) {
        const Tensor up = upsample2(current);
        const Tensor up_mask = upsample2_mask(current_mask);
        const Tensor& skip = features[static_cast<std::size_t>(stage)];
        const Tensor& skip_mask = masks[static_cast<std::size_t>(stage)];

        PConvInput<float> in;
        in.x = concat_channels(up, skip);
        in.group_masks = {up_mask, skip_mask};
        in.group_sizes = {up.dim(0), skip.dim(0)};
        in.background = bg ? backgrounds[static_cast<std::size_t>(stage)] : Tensor();

        PConvOutput<float> out =
            partial_conv_forward(in, net.weights.at("dec" + std::to_string(stage) + ".W"),
                                 net.weights.at("dec" + std::to_string(stage) + ".b"), 1, 1,
                                 cache ? &cache->dec_conv[static_cast<std::size_t>(stage)] : nullptr);
        if (stage > 0)
            out.y = nn::relu_forward(out.y,
                                     cache ? &cache->dec_relu[static_cast<std::size_t>(stage)] : nullptr);
        current = std::move(out.y);
        current_mask = std::move(out.mask);
    }
    if (cache) cache->recorded = true;
    return current;
}

Tensor unet_backward(const InpaintNet& net, const UnetCache& cache, const Tensor& gpred,
                     nn::NamedTensors<float>* weight_grads) {
    if (!cache.recorded) throw ValidationError("unet_backward: no recorded forward pass");
    const int s = net.desc.stages();

    // Gradients flowing into each encoder level's output (skip connections).
    std::vector<Tensor> skip_grad(static_cast<std::size_t>(s) + 1);

    Tensor g = gpred;
    for (int stage = 0; stage < s; ++stage) {
        if (stage > 0) g = nn::relu_backward(cache.dec_relu[static_cast<std::size_t>(stage)], g);
        PConvGrads<float> pg = partial_conv_backward(cache.dec_conv[static_cast<std::size_t>(stage)], g);
        if (weight_grads) {
            (*weight_grads)["dec" + std::to_string(stage) + ".W"] = std::move(pg.W);
            (*weight_grads)["dec" + std::to_string(stage) + ".b"] = std::move(pg.b);
        }
        // Split the concatenated input gradient back into [upsampled | skip].
        const int up_c = pg.x.dim(0) - (stage > 0 ? net.desc.channels[static_cast<std::size_t>(stage - 1)]
                                                  : net.desc.in_channels);
        const int gh = pg.x.dim(1), gw = pg.x.dim(2);
        Tensor gup({up_c, gh, gw});
        std::copy(pg.x.data.begin(), pg.x.data.begin() + gup.data.size(), gup.data.begin());
        const int skip_c = pg.x.dim(0) - up_c;
        Tensor gskip({skip_c, gh, gw});
        std::copy(pg.x.data.begin() + gup.data.size(), pg.x.data.end(), gskip.data.begin());
        skip_grad[static_cast<std::size_t>(stage)] = std::move(gskip);

        g = downsample_grad(gup, cache.enc_h[static_cast<std::size_t>(stage + 1)],
                            cache.enc_w[static_cast<std::size_t>(stage + 1)]);
    }

    // Deepest encoder output receives the decoder's downsampled gradient.
    // Walk the encoder backwards, merging skip gradients.
    for (int stage = s - 1; stage >= 0; --stage) {
        g = nn::relu_backward(cache.enc_relu[static_cast<std::size_t>(stage)], g);
        PConvGrads<float> pg = partial_conv_backward(cache.enc_conv[static_cast<std::size_t>(stage)], g);
        if (weight_grads) {
            (*weight_grads)["enc" + std::to_string(stage) + ".W"] = std::move(pg.W);
            (*weight_grads)["enc" + std::to_string(stage) + ".b"] = std::move(pg.b);
        }
        g = std::move(pg.x);
        const Tensor& extra = skip_grad[static_cast<std::size_t>(stage)];
        for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += extra.data[i];
    }
    return g;
}

Tensor composite_prediction(const MaskedImage& input, const Tensor& pred) {
    nn::require_shape(pred, input.image.shape, "composite pred");
    const int c = pred.dim(0), h = pred.dim(1), w = pred.dim(2);
    Tensor out({c, h, w});
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const std::size_t midx = static_cast<std::size_t>(i) * w + j;
                const std::size_t idx = (static_cast<std::size_t>(ci) * h + i) * w + j;
                if (input.background.data[midx] == 0.0f)
                    out.data[idx] = 0.0f;
                else if (input.missing.data[midx] == 1.0f)
                    out.data[idx] = input.image.data[idx];
                else
                    out.data[idx] = std::clamp(pred.data[idx], 0.0f, 1.0f);
            }
    return out;
}

TextureAtlas unet_inpaint(const InpaintNet& net, const MaskedImage& input) {
    const Tensor pred = unet_forward(net, input, nullptr);
    const Tensor comp = composite_prediction(input, pred);
    TextureAtlas atlas;
    atlas.image = tensor_to_image(comp);
    return atlas;
}

MaskedImage to_masked_image(const TextureAtlas& atlas, const Image8& missing, const Image8& background) {
    atlas.validate();
    const int h = atlas.height(), w = atlas.width();
    if (missing.height() != h || missing.width() != w || background.height() != h ||
        background.width() != w)
        throw ValidationError("to_masked_image: mask dimensions do not match the atlas");
    MaskedImage mi;
    mi.image = Tensor({3, h, w});
    mi.missing = Tensor({h, w});
    mi.background = Tensor({h, w});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const std::size_t midx = static_cast<std::size_t>(i) * w + j;
            mi.missing.data[midx] = missing.at(i, j) != 0 ? 1.0f : 0.0f;
            mi.background.data[midx] = background.at(i, j) != 0 ? 1.0f : 0.0f;
            for (int c = 0; c < 3; ++c)
                mi.image.data[(static_cast<std::size_t>(c) * h + i) * w + j] =
                    static_cast<float>(atlas.image.at(i, j, c)) / 255.0f;
        }
    return mi;
}

Image8 tensor_to_image(const Tensor& t) {
    nn::require_ndim(t, 3, "tensor_to_image");
    const int c = t.dim(0), h = t.dim(1), w = t.dim(2);
    if (c != 1 && c != 3) throw ValidationError("tensor_to_image: need 1 or 3 channels");
    Image8 img(h, w, c);
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j)
                img.at(i, j, ci) = static_cast<std::uint8_t>(std::lround(
                    std::clamp(t.data[(static_cast<std::size_t>(ci) * h + i) * w + j], 0.0f, 1.0f) * 255.0f));
    return img;
}

void save_inpaint_net(const InpaintNet& net, const std::string& path) {
    nn::WeightFile wf;
    wf.descriptor = net.desc.to_json();
    wf.tensors = net.weights;
    nn::save_weights(path, wf);
}

InpaintNet load_inpaint_net(const std::string& path) {
    nn::WeightFile wf = nn::load_weights(path);
    InpaintNet net;
    net.desc = InpaintNetDesc::from_json(wf.descriptor);
    net.weights = std::move(wf.tensors);
    return net;
}

} // namespace meshboost::inpaint
