#include "meshboost/shape/shape_model.hpp"

#include <json.hpp>

#include "meshboost/core/rng.hpp"
#include "meshboost/mesh/synthetic_body.hpp"
#include "meshboost/nn/weights_io.hpp"
#include "meshboost/shape/shape_nn.hpp"

namespace meshboost {

using nn::Tensor;

void ShapeModelDesc::validate() const {
    if (encoder_mlp.size() < 2 || encoder_mlp.front() != 3)
        throw ValidationError("ShapeModelDesc: encoder MLP must start at 3 features");
    if (encoder_dense.empty() || encoder_dense.back() != n_z)
        throw ValidationError("ShapeModelDesc: encoder dense head must end at n_z");
    if (decoder_mlp.size() < 2 || decoder_mlp.front() != 3 + n_z || decoder_mlp.back() != 3)
        throw ValidationError("ShapeModelDesc: decoder MLP must map 3+n_z to 3");
}

std::string ShapeModelDesc::to_json() const {
    nlohmann::json j;
    j["kind"] = "shape_model";
    j["encoder_mlp"] = encoder_mlp;
    j["encoder_dense"] = encoder_dense;
    j["n_z"] = n_z;
    j["decoder_mlp"] = decoder_mlp;
    return j.dump();
}

ShapeModelDesc ShapeModelDesc::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("kind", "") != "shape_model") throw ModelError("descriptor is not a shape model");
    ShapeModelDesc d;
    d.encoder_mlp = j.at("encoder_mlp").get<std::vector<int>>();
    d.encoder_dense = j.at("encoder_dense").get<std::vector<int>>();
    d.n_z = j.at("n_z").get<int>();
    d.decoder_mlp = j.at("decoder_mlp").get<std::vector<int>>();
    d.validate();
    return d;
}

namespace {

Tensor he_uniform(Rng& rng, int fan_in, std::vector<int> shape) {
    Tensor t(std::move(shape));
    const double limit = std::sqrt(6.0 / fan_in);
    for (auto& v : t.data) v = static_cast<float>(rng.uniform(-limit, limit));
    return t;
}

} // namespace

nn::NamedTensors<float> init_shape_weights(const ShapeModelDesc& desc, std::uint64_t seed) {
    desc.validate();
    Rng rng(seed);
    nn::NamedTensors<float> w;
    for (std::size_t l = 0; l + 1 < desc.encoder_mlp.size(); ++l) {
        const int din = desc.encoder_mlp[l], dout = desc.encoder_mlp[l + 1];
        w.emplace("enc.mlp" + std::to_string(l) + ".W", he_uniform(rng, din, {din, dout}));
        w.emplace("enc.mlp" + std::to_string(l) + ".b", Tensor({dout}));
    }
    int prev = desc.encoder_mlp.back();
    for (std::size_t l = 0; l < desc.encoder_dense.size(); ++l) {
        const int dout = desc.encoder_dense[l];
        w.emplace("enc.dense" + std::to_string(l) + ".W", he_uniform(rng, prev, {prev, dout}));
        w.emplace("enc.dense" + std::to_string(l) + ".b", Tensor({dout}));
        prev = dout;
    }
    for (std::size_t l = 0; l + 1 < desc.decoder_mlp.size(); ++l) {
        const int din = desc.decoder_mlp[l], dout = desc.decoder_mlp[l + 1];
        w.emplace("dec.mlp" + std::to_string(l) + ".W", he_uniform(rng, din, {din, dout}));
        w.emplace("dec.mlp" + std::to_string(l) + ".b", Tensor({dout}));
    }
    return w;
}

namespace detail {

std::vector<nn::MlpLayer<float>> encoder_mlp_layers(const ShapeModel& model) {
    std::vector<nn::MlpLayer<float>> layers;
    for (std::size_t l = 0; l + 1 < model.desc.encoder_mlp.size(); ++l)
        layers.push_back({model.weights.at("enc.mlp" + std::to_string(l) + ".W"),
                          model.weights.at("enc.mlp" + std::to_string(l) + ".b")});
    return layers;
}

std::vector<nn::MlpLayer<float>> decoder_mlp_layers(const ShapeModel& model) {
    std::vector<nn::MlpLayer<float>> layers;
    for (std::size_t l = 0; l + 1 < model.desc.decoder_mlp.size(); ++l)
        layers.push_back({model.weights.at("dec.mlp" + std::to_string(l) + ".W"),
                          model.weights.at("dec.mlp" + std::to_string(l) + ".b")});
    return layers;
}

} // namespace detail

Tensor points_to_tensor(const PointSet& points) {
    Tensor t({points.size(), 3});
    for (int i = 0; i < points.size(); ++i)
        for (int k = 0; k < 3; ++k) t.at2(i, k) = static_cast<float>(points.points(i, k));
    return t;
}

LatentCode encode_cached(const ShapeModel& model, const Tensor& points, EncoderCache* cache) {
    if (points.ndim() != 2 || points.dim(1) != 3 || points.dim(0) < 1)
        throw ValidationError("encode: need a non-empty [n,3] point tensor");
    const auto mlp = detail::encoder_mlp_layers(model);
    Tensor h = pointwise_mlp_forward(points, mlp, /*relu_last=*/true, cache ? &cache->mlp : nullptr);
    Tensor pooled = max_pool_points(h, cache ? &cache->pool : nullptr);

    // Dense head works on a [1,d] row.
    Tensor row({1, pooled.dim(0)});
    row.data = pooled.data;
    const std::size_t n_dense = model.desc.encoder_dense.size();
    if (cache) {
        cache->dense.resize(n_dense);
        cache->relu.resize(n_dense);
    }
    for (std::size_t l = 0; l < n_dense; ++l) {
        row = dense_forward(row, model.weights.at("enc.dense" + std::to_string(l) + ".W"),
                            model.weights.at("enc.dense" + std::to_string(l) + ".b"),
                            cache ? &cache->dense[l] : nullptr);
        if (l + 1 < n_dense) row = relu_forward(row, cache ? &cache->relu[l] : nullptr);
    }
    if (cache) cache->recorded = true;
    LatentCode code;
    code.z = Tensor({model.desc.n_z});
    code.z.data = row.data;
    return code;
}

LatentCode encode(const ShapeModel& model, const PointSet& points) {
    return encode_cached(model, points_to_tensor(points), nullptr);
}

Tensor encoder_backward_to_weights(const ShapeModel& model, const EncoderCache& cache,
                                   const Tensor& gz, nn::NamedTensors<float>& grads) {
    if (!cache.recorded) throw ValidationError("encoder backward: no recorded forward pass");
    Tensor g({1, gz.dim(0)});
    g.data = gz.data;
    for (std::size_t l = cache.dense.size(); l-- > 0;) {
        nn::DenseGrads<float> dg = nn::dense_backward(cache.dense[l], g);
        grads["enc.dense" + std::to_string(l) + ".W"] = std::move(dg.W);
        grads["enc.dense" + std::to_string(l) + ".b"] = std::move(dg.b);
        g = std::move(dg.x);
        if (l > 0) g = nn::relu_backward(cache.relu[l - 1], g);
    }
    Tensor gpool({g.dim(1)});
    gpool.data = g.data;
    Tensor gfeat = nn::max_pool_points_backward(cache.pool, gpool);
    nn::MlpGrads<float> mg = nn::pointwise_mlp_backward(cache.mlp, gfeat);
    for (std::size_t l = 0; l < mg.layers.size(); ++l) {
        grads["enc.mlp" + std::to_string(l) + ".W"] = std::move(mg.layers[l].W);
        grads["enc.mlp" + std::to_string(l) + ".b"] = std::move(mg.layers[l].b);
    }
    return mg.x;
}

Tensor decode_positions_cached(const ShapeModel& model, const LatentCode& z, const Mesh& templ,
                               DecoderCache* cache) {
    if (z.z.ndim() != 1 || z.z.dim(0) != model.desc.n_z)
        throw ShapeError("decode: latent code " + nn::shape_str(z.z.shape) + " does not match n_z=" +
                         std::to_string(model.desc.n_z));
    const int nv = templ.num_vertices();
    const int nz = model.desc.n_z;
    Tensor input({nv, 3 + nz});
    for (int i = 0; i < nv; ++i) {
        for (int k = 0; k < 3; ++k) input.at2(i, k) = static_cast<float>(templ.vertices(i, k));
        for (int k = 0; k < nz; ++k) input.at2(i, 3 + k) = z.z[static_cast<std::size_t>(k)];
    }
    const auto layers = detail::decoder_mlp_layers(model);
    Tensor out = pointwise_mlp_forward(input, layers, /*relu_last=*/false, cache ? &cache->mlp : nullptr);
    if (cache) {
        cache->n_vertices = nv;
        cache->recorded = true;
    }
    return out;
}

Tensor decoder_backward(const ShapeModel& model, const DecoderCache& cache, const Tensor& gpositions,
                        nn::NamedTensors<float>* weight_grads) {
    if (!cache.recorded) throw ValidationError("decoder backward: no recorded forward pass");
    nn::MlpGrads<float> mg = nn::pointwise_mlp_backward(cache.mlp, gpositions);
    if (weight_grads)
        for (std::size_t l = 0; l < mg.layers.size(); ++l) {
            (*weight_grads)["dec.mlp" + std::to_string(l) + ".W"] = std::move(mg.layers[l].W);
            (*weight_grads)["dec.mlp" + std::to_string(l) + ".b"] = std::move(mg.layers[l].b);
        }
    // Sum the latent part of the input gradient over vertices (the code was
    // broadcast to every row).
    const int nz = model.desc.n_z;
    Tensor gz({nz});
    for (int k = 0; k < nz; ++k) {
        double acc = 0.0;
        for (int i = 0; i < cache.n_vertices; ++i) acc += static_cast<double>(mg.x.at2(i, 3 + k));
        gz[static_cast<std::size_t>(k)] = static_cast<float>(acc);
    }
    return gz;
}

Mesh decode(const ShapeModel& model, const LatentCode& z, const Mesh* templ) {
    const Mesh& t = templ ? *templ : model.template_mesh;
    const Tensor out = decode_positions_cached(model, z, t, nullptr);
    Mesh result = t;
    for (int i = 0; i < t.num_vertices(); ++i)
        for (int k = 0; k < 3; ++k) result.vertices(i, k) = static_cast<double>(out.at2(i, k));
    result.vertex_normals.reset();
    return result;
}

std::pair<Mesh, LatentCode> complete_shape(const ShapeModel& model, const Mesh& partial,
                                           const CompletionConfig& cfg) {
    const PointSet samples = sample_surface(partial, cfg.encoder_points, cfg.seed);
    const LatentCode z = encode(model, samples);
    return {decode(model, z), z};
}

void save_shape_model(const ShapeModel& model, const std::string& path) {
    nn::WeightFile wf;
    wf.descriptor = model.desc.to_json();
    wf.tensors = model.weights;
    Tensor tau({1});
    tau[0] = static_cast<float>(model.tau_train);
    wf.tensors.emplace("_meta.tau_train", std::move(tau));
    nn::save_weights(path, wf);
}

ShapeModel load_shape_model(const std::string& path, int template_resolution, int hires_resolution) {
    nn::WeightFile wf = nn::load_weights(path);
    ShapeModel model;
    model.desc = ShapeModelDesc::from_json(wf.descriptor);
    const auto tau = wf.tensors.find("_meta.tau_train");
    if (tau != wf.tensors.end()) {
        model.tau_train = tau->second.data.empty() ? 0.0 : tau->second.data[0];
        wf.tensors.erase(tau);
    }
    model.weights = std::move(wf.tensors);
    model.template_mesh = body_template(template_resolution);
    if (hires_resolution > template_resolution) model.template_hires = body_template(hires_resolution);
    return model;
}

} // namespace meshboost
