#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "meshboost/core/rng.hpp"
#include "meshboost/nn/gradcheck.hpp"
#include "meshboost/nn/layers.hpp"
#include "meshboost/nn/optimizer.hpp"
#include "meshboost/nn/weights_io.hpp"

using namespace meshboost;
using namespace meshboost::nn;

namespace {

template <typename T>
TensorT<T> random_tensor(Rng& rng, std::vector<int> shape, double scale = 1.0) {
    TensorT<T> t(std::move(shape));
    for (auto& v : t.data) v = static_cast<T>(rng.normal() * scale);
    return t;
}

// Naive triple-loop dense reference, independent of the library kernel.
template <typename T>
TensorT<T> dense_reference(const TensorT<T>& x, const TensorT<T>& W, const TensorT<T>& b) {
    TensorT<T> y({x.dim(0), W.dim(1)});
    for (int i = 0; i < x.dim(0); ++i)
        for (int j = 0; j < W.dim(1); ++j) {
            T acc = b[static_cast<std::size_t>(j)];
            for (int k = 0; k < x.dim(1); ++k) acc += x.at2(i, k) * W.at2(k, j);
            y.at2(i, j) = acc;
        }
    return y;
}

// Naive 6-loop convolution reference.
template <typename T>
TensorT<T> conv_reference(const TensorT<T>& x, const TensorT<T>& W, const TensorT<T>& b, int stride,
                          int pad) {
    const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int cout = W.dim(0), k = W.dim(2);
    const int oh = (h + 2 * pad - k) / stride + 1, ow = (w + 2 * pad - k) / stride + 1;
    TensorT<T> y({cout, oh, ow});
    for (int co = 0; co < cout; ++co)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                T acc = b[static_cast<std::size_t>(co)];
                for (int ci = 0; ci < cin; ++ci)
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const int iy = oy * stride - pad + ky, ix = ox * stride - pad + kx;
                            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                            acc += x.data[(static_cast<std::size_t>(ci) * h + iy) * w + ix] *
                                   W.data[((static_cast<std::size_t>(co) * cin + ci) * k + ky) * k + kx];
                        }
                y.data[(static_cast<std::size_t>(co) * oh + oy) * ow + ox] = acc;
            }
    return y;
}

} // namespace

TEST_CASE("dense: identity weights pass input through") {
    Tensor x({3, 4});
    Rng rng(1);
    for (auto& v : x.data) v = static_cast<float>(rng.normal());
    Tensor W({4, 4}), b({4});
    for (int i = 0; i < 4; ++i) W.at2(i, i) = 1.0f;
    const Tensor y = dense_forward(x, W, b);
    CHECK(y.data == x.data);
}

TEST_CASE("dense: hand-computed case") {
    Tensor x({1, 2}), W({2, 1}), b({1});
    x.data = {4, 5};
    W.data = {1, 2};
    b.data = {3};
    const Tensor y = dense_forward(x, W, b);
    CHECK(y.data[0] == 17.0f);
}

TEST_CASE("dense: random shapes match the reference within 1e-5 relative") {
    Rng rng(2);
    for (int iter = 0; iter < 20; ++iter) {
        const int n = 1 + static_cast<int>(rng.uniform_index(6));
        const int din = 1 + static_cast<int>(rng.uniform_index(8));
        const int dout = 1 + static_cast<int>(rng.uniform_index(8));
        const auto x = random_tensor<float>(rng, {n, din});
        const auto W = random_tensor<float>(rng, {din, dout});
        const auto b = random_tensor<float>(rng, {dout});
        const Tensor y = dense_forward(x, W, b);
        const Tensor ref = dense_reference(x, W, b);
        for (std::size_t i = 0; i < y.data.size(); ++i)
            CHECK(std::abs(y.data[i] - ref.data[i]) <=
                  1e-5 * std::max(1.0f, std::abs(ref.data[i])));
    }
}

TEST_CASE("dense: shape mismatch names both shapes") {
    Tensor x({2, 3}), W({4, 2}), b({2});
    try {
        dense_forward(x, W, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[2,3]") != std::string::npos);
        CHECK(msg.find("[4,2]") != std::string::npos);
    }
}

TEST_CASE("pointwise mlp: permutation equivariance and single-point reduction") {
    Rng rng(3);
    std::vector<MlpLayer<float>> layers;
    std::vector<int> sizes = {3, 8, 5};
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
        layers.push_back({random_tensor<float>(rng, {sizes[l], sizes[l + 1]}),
                          random_tensor<float>(rng, {sizes[l + 1]})});

    const auto pts = random_tensor<float>(rng, {7, 3});
    const Tensor out = pointwise_mlp_forward(pts, layers, false);

    // Reverse the rows.
    Tensor reversed = pts;
    for (int i = 0; i < 7; ++i)
        for (int k = 0; k < 3; ++k) reversed.at2(i, k) = pts.at2(6 - i, k);
    const Tensor out_rev = pointwise_mlp_forward(reversed, layers, false);
    for (int i = 0; i < 7; ++i)
        for (int k = 0; k < 5; ++k) CHECK(out_rev.at2(i, k) == out.at2(6 - i, k));

    // A single point reduces to the dense chain.
    Tensor single({1, 3});
    for (int k = 0; k < 3; ++k) single.at2(0, k) = pts.at2(2, k);
    Tensor expect = dense_forward(single, layers[0].W, layers[0].b);
    expect = relu_forward(expect);
    expect = dense_forward(expect, layers[1].W, layers[1].b);
    const Tensor got = pointwise_mlp_forward(single, layers, false);
    CHECK(got.data == expect.data);
}

TEST_CASE("max pool: basics, permutation invariance, tie-break") {
    Tensor x({2, 2});
    x.data = {1, 5, 3, 2};
    const Tensor y = max_pool_points(x);
    CHECK(y.data == std::vector<float>{3, 5});

    Tensor single({1, 4});
    single.data = {4, -1, 0, 2};
    CHECK(max_pool_points(single).data == single.data);

    Rng rng(4);
    const auto pts = random_tensor<float>(rng, {9, 6});
    Tensor shuffled = pts;
    std::vector<int> perm = {4, 7, 1, 0, 8, 2, 6, 3, 5};
    for (int i = 0; i < 9; ++i)
        for (int k = 0; k < 6; ++k) shuffled.at2(i, k) = pts.at2(perm[i], k);
    CHECK(max_pool_points(shuffled).data == max_pool_points(pts).data);

    // Gradient routes to the lowest row on ties.
    Tensor tie({3, 1});
    tie.data = {7, 7, 7};
    MaxPoolCache<float> cache;
    max_pool_points(tie, &cache);
    Tensor gy({1});
    gy.data = {1};
    const Tensor gx = max_pool_points_backward(cache, gy);
    CHECK(gx.data == std::vector<float>{1, 0, 0});

    Tensor empty({0, 3});
    CHECK_THROWS_AS(max_pool_points(empty), ValidationError);
}

TEST_CASE("conv2d: 1x1 identity kernel passes input through") {
    Rng rng(5);
    const auto x = random_tensor<float>(rng, {1, 6, 7});
    Tensor W({1, 1, 1, 1}), b({1});
    W.data = {1};
    const Tensor y = conv2d_forward(x, W, b, 1, 0);
    CHECK(y.data == x.data);
}

TEST_CASE("conv2d: all-ones 3x3 kernel on a constant image") {
    const float c = 2.5f;
    Tensor x({1, 5, 5});
    for (auto& v : x.data) v = c;
    Tensor W({1, 1, 3, 3}), b({1});
    for (auto& v : W.data) v = 1.0f;
    const Tensor y = conv2d_forward(x, W, b, 1, 1);
    REQUIRE(y.shape == std::vector<int>{1, 5, 5});
    for (int i = 1; i < 4; ++i)
        for (int j = 1; j < 4; ++j) CHECK(y.data[static_cast<std::size_t>(i) * 5 + j] == 9 * c);
    CHECK(y.data[0] == 4 * c); // corner
}

TEST_CASE("conv2d: random cases match the 6-loop reference") {
    Rng rng(6);
    for (int iter = 0; iter < 20; ++iter) {
        const int cin = 1 + static_cast<int>(rng.uniform_index(3));
        const int cout = 1 + static_cast<int>(rng.uniform_index(3));
        const int k = 1 + 2 * static_cast<int>(rng.uniform_index(2));
        const int h = k + static_cast<int>(rng.uniform_index(6));
        const int w = k + static_cast<int>(rng.uniform_index(6));
        const int stride = 1 + static_cast<int>(rng.uniform_index(2));
        const int pad = static_cast<int>(rng.uniform_index(2));
        const auto x = random_tensor<float>(rng, {cin, h, w});
        const auto W = random_tensor<float>(rng, {cout, cin, k, k});
        const auto b = random_tensor<float>(rng, {cout});
        const Tensor y = conv2d_forward(x, W, b, stride, pad);
        const Tensor ref = conv_reference(x, W, b, stride, pad);
        REQUIRE(y.shape == ref.shape);
        for (std::size_t i = 0; i < y.data.size(); ++i)
            CHECK(std::abs(y.data[i] - ref.data[i]) <= 1e-5 * std::max(1.0f, std::abs(ref.data[i])));
    }
}

TEST_CASE("backward: finite differences validate every layer (64-bit)") {
    Rng rng(7);
    using DT = TensorT<double>;

    SUBCASE("dense") {
        for (int iter = 0; iter < 5; ++iter) {
            const auto x = random_tensor<double>(rng, {3, 4});
            const auto W = random_tensor<double>(rng, {4, 5});
            const auto b = random_tensor<double>(rng, {5});
            const auto gy = random_tensor<double>(rng, {3, 5});
            DenseCache<double> cache;
            dense_forward(x, W, b, &cache);
            const auto grads = dense_backward(cache, gy);

            // Scalar loss = <y, gy>.
            const auto loss_x = [&](const DT& xt) {
                const DT y = dense_forward(xt, W, b);
                double s = 0;
                for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * gy.data[i];
                return s;
            };
            CHECK(max_relative_error(grads.x, finite_difference<double>(loss_x, x)) < 1e-4);
            const auto loss_W = [&](const DT& Wt) {
                const DT y = dense_forward(x, Wt, b);
                double s = 0;
                for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * gy.data[i];
                return s;
            };
            CHECK(max_relative_error(grads.W, finite_difference<double>(loss_W, W)) < 1e-4);
            const auto loss_b = [&](const DT& bt) {
                const DT y = dense_forward(x, W, bt);
                double s = 0;
                for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * gy.data[i];
                return s;
            };
            CHECK(max_relative_error(grads.b, finite_difference<double>(loss_b, b)) < 1e-4);
        }
    }

    SUBCASE("dense identity passes upstream gradient through") {
        Tensor x({2, 3}), W({3, 3}), b({3});
        Rng r2(8);
        for (auto& v : x.data) v = static_cast<float>(r2.normal());
        for (int i = 0; i < 3; ++i) W.at2(i, i) = 1.0f;
        DenseCache<float> cache;
        dense_forward(x, W, b, &cache);
        Tensor gy({2, 3});
        for (auto& v : gy.data) v = static_cast<float>(r2.normal());
        const auto grads = dense_backward(cache, gy);
        CHECK(grads.x.data == gy.data);
    }

    SUBCASE("conv2d") {
        const auto x = random_tensor<double>(rng, {2, 5, 6});
        const auto W = random_tensor<double>(rng, {3, 2, 3, 3});
        const auto b = random_tensor<double>(rng, {3});
        for (int stride : {1, 2}) {
            Conv2dCache<double> cache;
            const DT y = conv2d_forward(x, W, b, stride, 1, &cache);
            const auto gy = random_tensor<double>(rng, y.shape);
            const auto grads = conv2d_backward(cache, gy);
            const auto dot = [&](const DT& t) {
                double s = 0;
                for (std::size_t i = 0; i < t.data.size(); ++i) s += t.data[i] * gy.data[i];
                return s;
            };
            CHECK(max_relative_error(
                      grads.x, finite_difference<double>(
                                   [&](const DT& xt) { return dot(conv2d_forward(xt, W, b, stride, 1)); }, x)) < 1e-4);
            CHECK(max_relative_error(
                      grads.W, finite_difference<double>(
                                   [&](const DT& Wt) { return dot(conv2d_forward(x, Wt, b, stride, 1)); }, W)) < 1e-4);
            CHECK(max_relative_error(
                      grads.b, finite_difference<double>(
                                   [&](const DT& bt) { return dot(conv2d_forward(x, W, bt, stride, 1)); }, b)) < 1e-4);
        }
    }

    SUBCASE("pointwise mlp with relu and max pool") {
        std::vector<MlpLayer<double>> layers;
        std::vector<int> sizes = {3, 6, 4};
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
            layers.push_back({random_tensor<double>(rng, {sizes[l], sizes[l + 1]}),
                              random_tensor<double>(rng, {sizes[l + 1]})});
        const auto pts = random_tensor<double>(rng, {5, 3});
        const auto gy = random_tensor<double>(rng, {4});

        MlpCache<double> mlp_cache;
        MaxPoolCache<double> pool_cache;
        const DT features = pointwise_mlp_forward(pts, layers, true, &mlp_cache);
        max_pool_points(features, &pool_cache);
        const DT gfeat = max_pool_points_backward(pool_cache, gy);
        const auto grads = pointwise_mlp_backward(mlp_cache, gfeat);

        const auto loss = [&](const DT& p) {
            const DT f = pointwise_mlp_forward(p, layers, true);
            const DT pooled = max_pool_points(f);
            double s = 0;
            for (std::size_t i = 0; i < pooled.data.size(); ++i) s += pooled.data[i] * gy.data[i];
            return s;
        };
        CHECK(max_relative_error(grads.x, finite_difference<double>(loss, pts, 1e-4)) < 1e-4);
    }

    SUBCASE("backward without forward record throws") {
        DenseCache<float> cache;
        Tensor gy({1, 1});
        CHECK_THROWS_AS(dense_backward(cache, gy), ValidationError);
        Conv2dCache<float> ccache;
        Tensor cgy({1, 1, 1});
        CHECK_THROWS_AS(conv2d_backward(ccache, cgy), ValidationError);
    }
}

TEST_CASE("optimizer: lr=0 is a no-op; gradient descent contracts w^2") {
    NamedTensors<float> w;
    w.emplace("w", Tensor({1}));
    w["w"].data = {1.0f};
    NamedTensors<float> g;
    g.emplace("w", Tensor({1}));
    g["w"].data = {123.0f};

    OptimizerT<float> frozen({OptimMethod::Sgd, 0.0, 0.0});
    frozen.step(w, g);
    CHECK(w["w"].data[0] == 1.0f);

    OptimizerT<float> sgd({OptimMethod::Sgd, 0.1, 0.0});
    for (int i = 0; i < 100; ++i) {
        g["w"].data[0] = 2.0f * w["w"].data[0]; // d/dw w^2
        sgd.step(w, g);
    }
    CHECK(std::abs(w["w"].data[0]) < 1e-9);

    SUBCASE("mismatched parameter names rejected") {
        NamedTensors<float> bad;
        bad.emplace("other", Tensor({1}));
        CHECK_THROWS_AS(sgd.step(w, bad), ValidationError);
    }
}

TEST_CASE("optimizer: identical runs are bit-identical") {
    Rng rng(9);
    for (auto method : {OptimMethod::Sgd, OptimMethod::Adam}) {
        auto run = [&](std::uint64_t seed) {
            Rng local(seed);
            NamedTensors<float> w;
            w.emplace("a", random_tensor<float>(local, {4, 3}));
            OptimizerT<float> opt({method, 1e-2, 0.9});
            for (int i = 0; i < 50; ++i) {
                NamedTensors<float> g;
                g.emplace("a", random_tensor<float>(local, {4, 3}));
                opt.step(w, g);
            }
            return w["a"].data;
        };
        CHECK(run(7) == run(7));
    }
    (void)rng;
}

TEST_CASE("weights io: round trip, truncation, descriptor mismatch") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "meshboost_weights_test";
    fs::create_directories(dir);
    const auto path = (dir / "model.w3b").string();

    Rng rng(10);
    WeightFile wf;
    wf.descriptor = R"({"kind":"test","n":3})";
    wf.tensors.emplace("layer0.W", random_tensor<float>(rng, {3, 4}));
    wf.tensors.emplace("layer0.b", random_tensor<float>(rng, {4}));
    save_weights(path, wf);

    const WeightFile back = load_weights(path, wf.descriptor);
    CHECK(back.descriptor == wf.descriptor);
    REQUIRE(back.tensors.size() == 2);
    CHECK(back.tensors.at("layer0.W").data == wf.tensors.at("layer0.W").data);
    CHECK(back.tensors.at("layer0.W").shape == wf.tensors.at("layer0.W").shape);

    CHECK_THROWS_AS(load_weights(path, "{\"different\":1}"), ModelError);

    // Truncated file.
    {
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream out((dir / "trunc.w3b").string(), std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_AS(load_weights((dir / "trunc.w3b").string()), ModelError);

    // Bad magic.
    {
        std::ofstream out((dir / "junk.w3b").string(), std::ios::binary);
        out << "NOPEnope";
    }
    CHECK_THROWS_AS(load_weights((dir / "junk.w3b").string()), ModelError);

    // Fuzzed round trips.
    for (int iter = 0; iter < 30; ++iter) {
        WeightFile f;
        f.descriptor = "{\"iter\":" + std::to_string(iter) + "}";
        const int count = 1 + static_cast<int>(rng.uniform_index(4));
        for (int t = 0; t < count; ++t)
            f.tensors.emplace("t" + std::to_string(t),
                              random_tensor<float>(rng, {1 + static_cast<int>(rng.uniform_index(5)),
                                                         1 + static_cast<int>(rng.uniform_index(5))}));
        save_weights(path, f);
        const WeightFile b2 = load_weights(path);
        REQUIRE(b2.tensors.size() == f.tensors.size());
        for (const auto& [name, tensor] : f.tensors) {
            REQUIRE(b2.tensors.at(name).shape == tensor.shape);
            REQUIRE(b2.tensors.at(name).data == tensor.data);
        }
    }
}
