// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line. Run everything with no arguments or one criterion
// with --criterion N. Exit code = number of failures.

#include <Eigen/Geometry>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "meshboost/core/png_io.hpp"
#include "meshboost/core/rng.hpp"
#include "meshboost/inpaint/loss.hpp"
#include "meshboost/inpaint/train_inpaint.hpp"
#include "meshboost/mesh/holes.hpp"
#include "meshboost/mesh/normals.hpp"
#include "meshboost/mesh/obj_io.hpp"
#include "meshboost/mesh/raster.hpp"
#include "meshboost/spatial/triangle_index.hpp"
#include "meshboost/mesh/synthetic_body.hpp"
#include "meshboost/metrics/chamfer.hpp"
#include "meshboost/nn/gradcheck.hpp"
#include "meshboost/pipeline/commands.hpp"
#include "meshboost/shape/refine.hpp"
#include "meshboost/shape/train_shape.hpp"
#include "meshboost/texture/masks.hpp"
#include "meshboost/texture/transfer.hpp"

using namespace meshboost;
using nn::Tensor;
using nn::TensorT;

namespace {

namespace fs = std::filesystem;

struct CheckFailure {
    std::string message;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw CheckFailure{message};
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "meshboost_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

template <typename T>
TensorT<T> random_tensor(Rng& rng, std::vector<int> shape, double scale = 1.0) {
    TensorT<T> t(std::move(shape));
    for (auto& v : t.data) v = static_cast<T>(rng.normal() * scale);
    return t;
}

PointSet random_point_set(Rng& rng, int n, double extent = 2.0) {
    PointSet ps;
    ps.points.resize(n, 3);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < 3; ++k) ps.points(i, k) = rng.uniform(-extent, extent);
    return ps;
}

// --------------------------------------------------------------------------
// 1. Chamfer oracle equivalence.

std::string criterion1() {
    Rng rng(101);
    double worst = 0.0;
    for (int iter = 0; iter < 500; ++iter) {
        const PointSet a = random_point_set(rng, 1 + static_cast<int>(rng.uniform_index(64)));
        const PointSet b = random_point_set(rng, 1 + static_cast<int>(rng.uniform_index(64)));
        const double pairs[4][2] = {
            {directed_chamfer(a, b), brute_force_directed_chamfer(a, b)},
            {directed_chamfer(b, a), brute_force_directed_chamfer(b, a)},
            {symmetric_chamfer(a, b), brute_force_symmetric_chamfer(a, b)},
            {symmetric_chamfer(b, a), brute_force_symmetric_chamfer(b, a)},
        };
        for (const auto& p : pairs) {
            const double rel = std::abs(p[0] - p[1]) / std::max(1e-300, std::abs(p[1]));
            worst = std::max(worst, rel);
            require(rel <= 1e-12, "tree vs brute force Chamfer relative error " + std::to_string(rel));
        }
    }
    return "500 pairs, worst relative error " + std::to_string(worst);
}

// --------------------------------------------------------------------------
// 2. Spatial-index oracles.

std::string criterion2() {
    Rng rng(202);
    // Nearest neighbors.
    Eigen::Matrix<double, Eigen::Dynamic, 3> pts(4000, 3);
    for (int i = 0; i < 4000; ++i)
        for (int k = 0; k < 3; ++k) pts(i, k) = rng.uniform(-1, 1);
    const PointIndex index(pts);
    for (int q = 0; q < 10000; ++q) {
        const Eigen::Vector3d query(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                                    rng.uniform(-1.2, 1.2));
        const NearestHit tree = index.nearest(query);
        const NearestHit brute = brute_force_nearest(pts, query);
        require(tree.id == brute.id && tree.squared_dist == brute.squared_dist,
                "nearest-neighbor mismatch at query " + std::to_string(q));
    }

    // Ray casts against a body mesh: half the rays aim at sampled surface
    // points (hit-heavy), half are fully random (miss coverage).
    Mesh mesh = body_template(1);
    const TriangleIndex tri_index(mesh);
    const PointSet targets = sample_surface(mesh, 5000, 2020);
    int hits = 0;
    for (int q = 0; q < 10000; ++q) {
        const Vec3 origin(rng.uniform(-1.2, 1.2), rng.uniform(-0.8, 1.2), rng.uniform(-1.2, 1.2));
        Vec3 dir;
        if (q % 2 == 0) {
            dir = Vec3(targets.points.row(q / 2).transpose()) - origin;
        } else {
            dir = Vec3(rng.normal(), rng.normal(), rng.normal());
        }
        while (dir.norm() < 1e-9) dir = Vec3(rng.normal(), rng.normal(), rng.normal());
        dir.normalize();
        const auto tree = tri_index.ray_cast(origin, dir, 3.0);
        const auto brute = brute_force_ray_cast(mesh, origin, dir, 3.0);
        require(tree.has_value() == brute.has_value(), "ray hit/miss mismatch at " + std::to_string(q));
        if (tree) {
            ++hits;
            require(tree->face == brute->face, "ray face mismatch at " + std::to_string(q));
            require(std::abs(tree->t - brute->t) <= 1e-9, "ray distance mismatch at " + std::to_string(q));
        }
    }
    require(hits > 3000, "ray suite hit too few triangles: " + std::to_string(hits));
    return "10000 nearest queries + 10000 ray casts (" + std::to_string(hits) + " hits) match brute force";
}

// --------------------------------------------------------------------------
// 3. Partial convolution reduces to standard convolution.

std::string criterion3() {
    Rng rng(303);
    double worst = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        const int cin = 1 + static_cast<int>(rng.uniform_index(4));
        const int cout = 1 + static_cast<int>(rng.uniform_index(4));
        const int h = 5 + static_cast<int>(rng.uniform_index(8));
        const int w = 5 + static_cast<int>(rng.uniform_index(8));
        const int stride = 1 + static_cast<int>(rng.uniform_index(2));
        const auto x = random_tensor<float>(rng, {cin, h, w});
        const auto W = random_tensor<float>(rng, {cout, cin, 3, 3});
        const auto b = random_tensor<float>(rng, {cout});
        const Tensor ref = nn::conv2d_forward(x, W, b, stride, 1);

        // Both published forms: with the background mask (all foreground)
        // and without one.
        for (int variant = 0; variant < 2; ++variant) {
            inpaint::PConvInput<float> in = inpaint::make_pconv_input(
                x, Tensor({h, w}, 1.0f), variant == 0 ? Tensor({h, w}, 1.0f) : Tensor());
            const auto out = inpaint::partial_conv_forward(in, W, b, stride, 1);
            require(out.y.shape == ref.shape, "partial conv output shape mismatch");
            for (std::size_t i = 0; i < ref.data.size(); ++i) {
                const double rel = std::abs(out.y.data[i] - ref.data[i]) /
                                   std::max(1e-6, static_cast<double>(std::abs(ref.data[i])));
                worst = std::max(worst, rel);
                require(rel <= 1e-6, "partial conv deviates from conv2d by " + std::to_string(rel));
            }
        }
    }
    return "100 layers x 2 mask forms, worst relative deviation " + std::to_string(worst);
}

// --------------------------------------------------------------------------
// 4. Background invariance of the UNet output.

std::string criterion4() {
    Rng rng(404);
    for (int iter = 0; iter < 50; ++iter) {
        inpaint::InpaintNetDesc desc;
        desc.channels = rng.uniform() < 0.5 ? std::vector<int>{8, 16} : std::vector<int>{4, 8, 16};
        inpaint::InpaintNet net{desc, inpaint::init_inpaint_weights(desc, rng.next_u64())};

        const int size = desc.channels.size() == 2 ? 16 : 32;
        inpaint::MaskedImage input;
        input.image = Tensor({3, size, size});
        for (auto& v : input.image.data) v = static_cast<float>(rng.uniform());
        input.missing = Tensor({size, size});
        input.background = Tensor({size, size});
        for (std::size_t i = 0; i < input.missing.data.size(); ++i) {
            input.background.data[i] = rng.uniform() < 0.7 ? 1.0f : 0.0f;
            input.missing.data[i] =
                input.background.data[i] == 0.0f ? 1.0f : (rng.uniform() < 0.8 ? 1.0f : 0.0f);
        }

        const TextureAtlas before = inpaint::unet_inpaint(net, input);
        inpaint::MaskedImage perturbed = input;
        for (int c = 0; c < 3; ++c)
            for (std::size_t m = 0; m < input.background.data.size(); ++m)
                if (input.background.data[m] == 0.0f)
                    perturbed.image.data[static_cast<std::size_t>(c) * size * size + m] =
                        static_cast<float>(rng.uniform(-50.0, 50.0));
        const TextureAtlas after = inpaint::unet_inpaint(net, perturbed);
        require(before.image == after.image,
                "background perturbation changed the output at net " + std::to_string(iter));
    }
    return "50 nets x arbitrary background perturbations, bitwise-identical outputs";
}

// --------------------------------------------------------------------------
// 5. Mask convergence through stride-1 partial convolutions.

std::string criterion5() {
    Rng rng(505);
    for (int iter = 0; iter < 40; ++iter) {
        const int size = 48;
        // Foreground: everything except a random border band and a few
        // blobs; holes are kept >= 2 px away from background so the unmask
        // wave can reach them from every side.
        Tensor mb({size, size}, 1.0f);
        const int band = static_cast<int>(rng.uniform_index(4));
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j)
                if (i < band || j < band || i >= size - band || j >= size - band)
                    mb.data[static_cast<std::size_t>(i) * size + j] = 0.0f;

        const double r = 1.0 + rng.uniform() * 7.0; // radius in (1, 8)
        const int ci = 14 + static_cast<int>(rng.uniform_index(20));
        const int cj = 14 + static_cast<int>(rng.uniform_index(20));
        Tensor m({size, size}, 1.0f);
        int hole_count = 0;
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j) {
                const double d2 = static_cast<double>(i - ci) * (i - ci) +
                                  static_cast<double>(j - cj) * (j - cj);
                if (d2 <= r * r) {
                    m.data[static_cast<std::size_t>(i) * size + j] = 0.0f;
                    ++hole_count;
                }
            }
        require(hole_count > 0, "empty hole");

        Tensor x({1, size, size}, 0.0f);
        Tensor W({1, 1, 3, 3}, 0.0f);
        Tensor b({1});
        Tensor mask = m;
        const int layers = static_cast<int>(std::ceil(r));
        for (int layer = 0; layer < layers; ++layer) {
            inpaint::PConvInput<float> in = inpaint::make_pconv_input(x, mask, mb);
            mask = inpaint::partial_conv_forward(in, W, b, 1, 1).mask;
        }
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j) {
                if (mb.data[static_cast<std::size_t>(i) * size + j] == 0.0f) continue;
                require(mask.data[static_cast<std::size_t>(i) * size + j] == 1.0f,
                        "hole of radius " + std::to_string(r) + " not unmasked after " +
                            std::to_string(layers) + " layers");
            }
    }
    return "40 random hole patterns, every hole of radius r unmasked within ceil(r) layers";
}

// --------------------------------------------------------------------------
// 6. Gradient checks for every layer and loss term.

std::string criterion6() {
    Rng rng(606);
    using DT = TensorT<double>;
    const auto dot = [](const DT& t, const DT& g) {
        double s = 0;
        for (std::size_t i = 0; i < t.data.size(); ++i) s += t.data[i] * g.data[i];
        return s;
    };

    // Dense.
    {
        const auto x = random_tensor<double>(rng, {3, 5});
        const auto W = random_tensor<double>(rng, {5, 4});
        const auto b = random_tensor<double>(rng, {4});
        const auto gy = random_tensor<double>(rng, {3, 4});
        nn::DenseCache<double> cache;
        nn::dense_forward(x, W, b, &cache);
        const auto grads = nn::dense_backward(cache, gy);
        require(nn::max_relative_error(grads.x, nn::finite_difference<double>(
                                                    [&](const DT& t) { return dot(nn::dense_forward(t, W, b), gy); }, x)) <= 1e-4,
                "dense input gradient");
        require(nn::max_relative_error(grads.W, nn::finite_difference<double>(
                                                    [&](const DT& t) { return dot(nn::dense_forward(x, t, b), gy); }, W)) <= 1e-4,
                "dense weight gradient");
        require(nn::max_relative_error(grads.b, nn::finite_difference<double>(
                                                    [&](const DT& t) { return dot(nn::dense_forward(x, W, t), gy); }, b)) <= 1e-4,
                "dense bias gradient");
    }
    // Conv2d.
    {
        const auto x = random_tensor<double>(rng, {2, 6, 5});
        const auto W = random_tensor<double>(rng, {3, 2, 3, 3});
        const auto b = random_tensor<double>(rng, {3});
        for (int stride : {1, 2}) {
            nn::Conv2dCache<double> cache;
            const DT y = nn::conv2d_forward(x, W, b, stride, 1, &cache);
            const auto gy = random_tensor<double>(rng, y.shape);
            const auto grads = nn::conv2d_backward(cache, gy);
            require(nn::max_relative_error(
                        grads.x, nn::finite_difference<double>(
                                     [&](const DT& t) { return dot(nn::conv2d_forward(t, W, b, stride, 1), gy); }, x)) <= 1e-4,
                    "conv2d input gradient");
            require(nn::max_relative_error(
                        grads.W, nn::finite_difference<double>(
                                     [&](const DT& t) { return dot(nn::conv2d_forward(x, t, b, stride, 1), gy); }, W)) <= 1e-4,
                    "conv2d weight gradient");
        }
    }
    // Shared MLP + max pool.
    {
        std::vector<nn::MlpLayer<double>> layers;
        const std::vector<int> sizes = {3, 6, 5};
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
            layers.push_back({random_tensor<double>(rng, {sizes[l], sizes[l + 1]}),
                              random_tensor<double>(rng, {sizes[l + 1]})});
        const auto pts = random_tensor<double>(rng, {7, 3});
        const auto gy = random_tensor<double>(rng, {5});
        nn::MlpCache<double> mlp_cache;
        nn::MaxPoolCache<double> pool_cache;
        const DT f = nn::pointwise_mlp_forward(pts, layers, true, &mlp_cache);
        nn::max_pool_points(f, &pool_cache);
        const DT gf = nn::max_pool_points_backward(pool_cache, gy);
        const auto grads = nn::pointwise_mlp_backward(mlp_cache, gf);
        const auto loss = [&](const DT& p) {
            return dot(nn::max_pool_points(nn::pointwise_mlp_forward(p, layers, true)), gy);
        };
        require(nn::max_relative_error(grads.x, nn::finite_difference<double>(loss, pts, 1e-4)) <= 1e-4,
                "shared-MLP/max-pool input gradient");
    }
    // Partial conv.
    {
        const auto x = random_tensor<double>(rng, {2, 6, 6});
        const auto W = random_tensor<double>(rng, {2, 2, 3, 3});
        const auto b = random_tensor<double>(rng, {2});
        TensorT<double> m({6, 6}), mb({6, 6});
        for (auto& v : m.data) v = rng.uniform() < 0.6 ? 1.0 : 0.0;
        for (auto& v : mb.data) v = rng.uniform() < 0.8 ? 1.0 : 0.0;
        inpaint::PConvCache<double> cache;
        inpaint::PConvInput<double> in = inpaint::make_pconv_input(x, m, mb);
        const auto out = inpaint::partial_conv_forward(in, W, b, 1, 1, &cache);
        const auto gy = random_tensor<double>(rng, out.y.shape);
        const auto grads = inpaint::partial_conv_backward(cache, gy);
        const auto loss = [&](const DT& t) {
            inpaint::PConvInput<double> i2 = inpaint::make_pconv_input(t, m, mb);
            return dot(inpaint::partial_conv_forward(i2, W, b, 1, 1).y, gy);
        };
        require(nn::max_relative_error(grads.x, nn::finite_difference<double>(loss, x)) <= 1e-4,
                "partial conv input gradient");
        const auto lossW = [&](const DT& t) {
            inpaint::PConvInput<double> i2 = inpaint::make_pconv_input(x, m, mb);
            return dot(inpaint::partial_conv_forward(i2, t, b, 1, 1).y, gy);
        };
        require(nn::max_relative_error(grads.W, nn::finite_difference<double>(lossW, W)) <= 1e-4,
                "partial conv weight gradient");
    }
    // Composite inpainting loss (piecewise smooth: kinked coordinates are
    // detected via one-sided slopes and skipped).
    {
        inpaint::InpaintNetDesc desc;
        desc.channels = {4, 8};
        inpaint::InpaintNet net{desc, inpaint::init_inpaint_weights(desc, 77)};
        const int sz = 8;
        Tensor gt({3, sz, sz});
        for (auto& v : gt.data) v = static_cast<float>(rng.uniform());
        Tensor mb({sz, sz}), m({sz, sz});
        for (std::size_t i = 0; i < mb.data.size(); ++i) {
            mb.data[i] = rng.uniform() < 0.8 ? 1.0f : 0.0f;
            m.data[i] = mb.data[i] == 0.0f ? 1.0f : (rng.uniform() < 0.6 ? 1.0f : 0.0f);
        }
        Tensor pred = gt;
        for (auto& v : pred.data) v += 0.25f;
        const inpaint::LossWeights weights;
        const auto r = inpaint::loss_inpaint(pred, gt, m, mb, net, weights, true);
        const double h = 1e-3;
        int checked = 0, kinks = 0;
        for (std::size_t i = 0; i < pred.data.size(); i += 3) {
            Tensor pp = pred, pm = pred;
            pp.data[i] += static_cast<float>(h);
            pm.data[i] -= static_cast<float>(h);
            const double f0 = inpaint::loss_inpaint(pred, gt, m, mb, net, weights, false).total;
            const double fp = inpaint::loss_inpaint(pp, gt, m, mb, net, weights, false).total;
            const double fm = inpaint::loss_inpaint(pm, gt, m, mb, net, weights, false).total;
            const double right = (fp - f0) / h, left = (f0 - fm) / h;
            if (std::abs(right - left) > 0.002 * std::max({std::abs(right), std::abs(left), 1e-3})) {
                ++kinks;
                continue;
            }
            const double fd = (fp - fm) / (2 * h);
            const double an = r.grad_pred.data[i];
            const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-3});
            require(rel <= 1e-3, "inpainting loss gradient off by " + std::to_string(rel));
            ++checked;
        }
        require(checked >= 20, "too few smooth loss coordinates: " + std::to_string(checked));
    }
    // End-to-end refinement objective gradient w.r.t. z (smooth probe point).
    {
        ShapeModelDesc desc;
        desc.encoder_mlp = {3, 8, 8};
        desc.encoder_dense = {8, 8};
        desc.n_z = 8;
        desc.decoder_mlp = {11, 8, 3};
        ShapeModel model;
        model.desc = desc;
        model.weights = init_shape_weights(desc, 8);
        model.template_mesh = body_template(1);
        const Mesh partial = body_template(1);
        RefineConfig cfg;
        cfg.partial_samples = 64;
        cfg.decoded_samples = 96;
        cfg.use_hires_template = false;
        cfg.seed = 3;
        const double h = 1e-4;
        bool found = false;
        for (std::uint64_t zseed = 0; zseed < 20 && !found; ++zseed) {
            Rng zrng(900 + zseed);
            LatentCode z;
            z.z = Tensor({8});
            for (auto& v : z.z.data) v = static_cast<float>(zrng.normal() * 0.2);
            const RefineProbe probe = refine_objective(model, partial, z, cfg, true);
            double worst = 0.0;
            for (int k = 0; k < 8; ++k) {
                LatentCode zp = z, zm = z;
                zp.z.data[static_cast<std::size_t>(k)] += static_cast<float>(h);
                zm.z.data[static_cast<std::size_t>(k)] -= static_cast<float>(h);
                const double fd = (refine_objective(model, partial, zp, cfg, false).value -
                                   refine_objective(model, partial, zm, cfg, false).value) /
                                  (2 * h);
                const double an = probe.grad_z.data[static_cast<std::size_t>(k)];
                worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-3}));
            }
            found = worst <= 1e-3;
        }
        require(found, "no smooth probe point matched the end-to-end z gradient at 1e-3");
    }
    return "dense, conv2d, shared-MLP+pool, partial conv, losses and the z objective all pass";
}

// --------------------------------------------------------------------------
// 7. Directed-vs-symmetric refinement (Fig. 7 proxy at desk scale).

std::string criterion7() {
    // Toy shape model.
    ShapeTrainConfig train_cfg;
    train_cfg.desc.encoder_mlp = {3, 32, 64, 128};
    train_cfg.desc.encoder_dense = {128, 64};
    train_cfg.desc.n_z = 64;
    train_cfg.desc.decoder_mlp = {3 + 64, 64, 32, 3};
    train_cfg.num_shapes = 160;
    train_cfg.epochs = 15;
    train_cfg.encoder_points = 384;
    train_cfg.decoder_points = 256;
    train_cfg.learning_rate = 2e-3;
    train_cfg.seed = 707;
    const ShapeTrainResult trained = train_shape_model(train_cfg);
    const ShapeModel& model = trained.model;

    int directed_wins = 0, total = 0, improved = 0;
    for (int case_id = 0; case_id < 50; ++case_id) {
        // Ground-truth body from the training family.
        Rng rng(mix_seed(7070, static_cast<std::uint64_t>(case_id)));
        Eigen::VectorXd pose(kBodyPoseParams), shape(kBodyShapeParams);
        for (int k = 0; k < kBodyPoseParams; ++k) pose[k] = rng.uniform(-M_PI / 3, M_PI / 3);
        for (int k = 0; k < kBodyShapeParams; ++k) shape[k] = rng.uniform(-0.2, 0.2);
        const Mesh truth = generate_synthetic_body(pose, shape);

        // Holes covering >= 30% of the surface area.
        TexturedMesh partial;
        double removed_fraction = 0.0;
        for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
            const HoleSpec spec{mix_seed(7171, static_cast<std::uint64_t>(case_id), attempt),
                                8, 0.12, 0.22};
            TexturedMesh candidate;
            try {
                candidate = cut_holes({truth, {}}, spec);
            } catch (const ValidationError&) {
                continue; // everything removed; try another seed
            }
            const auto area = [](const Mesh& m) {
                double a = 0.0;
                for (int f = 0; f < m.num_faces(); ++f) {
                    const Vec3 p0 = m.vertices.row(m.faces(f, 0));
                    const Vec3 p1 = m.vertices.row(m.faces(f, 1));
                    const Vec3 p2 = m.vertices.row(m.faces(f, 2));
                    a += 0.5 * (p1 - p0).cross(p2 - p0).norm();
                }
                return a;
            };
            removed_fraction = 1.0 - area(candidate.mesh) / area(truth);
            if (removed_fraction >= 0.30 && removed_fraction <= 0.60) {
                partial = candidate;
                break;
            }
        }
        if (partial.mesh.num_faces() == 0) continue; // no qualifying hole pattern found

        CompletionConfig completion;
        completion.encoder_points = 384;
        completion.seed = mix_seed(7272, static_cast<std::uint64_t>(case_id));
        const auto [estimate, z0] = complete_shape(model, partial.mesh, completion);

        RefineConfig refine;
        refine.iterations = 60;
        refine.partial_samples = 512;
        refine.decoded_samples = 512;
        refine.use_hires_template = false;
        refine.seed = completion.seed;

        refine.objective = RefineObjective::Directed;
        const RefineResult directed = refine_latent(model, partial.mesh, z0, refine);
        refine.objective = RefineObjective::Symmetric;
        const RefineResult symmetric = refine_latent(model, partial.mesh, z0, refine);

        require(directed.final_objective <= directed.initial_objective + 1e-12,
                "directed refinement worsened its objective");
        require(symmetric.final_objective <= symmetric.initial_objective + 1e-12,
                "symmetric refinement worsened its objective");
        improved += 2;

        const PointSet truth_pts = sample_surface(truth, 4096, mix_seed(7373, case_id));
        const PointSet dir_pts = sample_surface(directed.mesh, 4096, mix_seed(7474, case_id));
        const PointSet sym_pts = sample_surface(symmetric.mesh, 4096, mix_seed(7575, case_id));
        const double err_dir = symmetric_chamfer(truth_pts, dir_pts);
        const double err_sym = symmetric_chamfer(truth_pts, sym_pts);
        ++total;
        if (err_dir <= err_sym) ++directed_wins;
    }
    require(total >= 45, "too few qualifying cases: " + std::to_string(total));
    const double win_rate = static_cast<double>(directed_wins) / total;
    require(win_rate >= 0.80, "directed refinement won only " + std::to_string(directed_wins) + "/" +
                                  std::to_string(total));
    return std::to_string(directed_wins) + "/" + std::to_string(total) +
           " cases favor the directed objective; every refinement improved its own objective";
}

// --------------------------------------------------------------------------
// 8. Identity texture transfer at 512^2.

std::string criterion8() {
    const TexturedMesh source{body_template(1), make_body_texture(512, 808)};
    const Mesh target = compute_vertex_normals(source.mesh);
    TransferConfig cfg;
    cfg.atlas_width = 512;
    cfg.atlas_height = 512;
    const TextureAtlas transferred = transfer_texture(source, target, cfg);

    const Image8 mb = rasterize_background_mask(source.mesh, 512, 512);
    std::int64_t foreground = 0, matched = 0;
    for (int i = 0; i < 512; ++i)
        for (int j = 0; j < 512; ++j) {
            if (mb.at(i, j) != 255) continue;
            ++foreground;
            bool ok = true;
            for (int c = 0; c < 3; ++c)
                ok = ok && std::abs(static_cast<int>(transferred.image.at(i, j, c)) -
                                    static_cast<int>(source.atlas.image.at(i, j, c))) <= 2;
            matched += ok;
        }
    require(foreground > 50000, "implausibly small foreground");
    const double rate = static_cast<double>(matched) / foreground;
    require(rate >= 0.99, "identity transfer matched only " + std::to_string(rate));
    std::ostringstream os;
    os.precision(6);
    os << matched << "/" << foreground << " foreground texels within 2/255 (" << 100.0 * rate << "%)";
    return os.str();
}

// --------------------------------------------------------------------------
// 9. Inpainting ablation: background masks on vs off (Fig. 9 proxy).

std::string criterion9() {
    inpaint::InpaintTrainConfig base;
    base.desc.channels = {8, 16, 32};
    base.corpus.num_images = 12;
    base.corpus.image_size = 64;
    base.iterations = 600;
    base.learning_rate = 2e-3;
    base.seed = 909;

    inpaint::InpaintTrainConfig with_bg = base;
    with_bg.desc.use_background_mask = true;
    inpaint::InpaintTrainConfig without_bg = base;
    without_bg.desc.use_background_mask = false;

    const inpaint::InpaintTrainResult net_bg = inpaint::train_inpainter(with_bg);
    const inpaint::InpaintTrainResult net_plain = inpaint::train_inpainter(without_bg);

    // Fresh eval items from an unseen corpus seed.
    inpaint::InpaintCorpusConfig eval_cfg = base.corpus;
    eval_cfg.num_images = 8;
    eval_cfg.seed = 990;
    const auto eval_items = inpaint::make_atlas_corpus(eval_cfg);

    const auto residual_black = [](const inpaint::InpaintNet& net,
                                   const std::vector<inpaint::CorpusItem>& items) {
        int count = 0;
        for (const auto& item : items) {
            inpaint::MaskedImage input;
            input.missing = item.missing;
            input.background = item.background;
            input.image = item.image;
            const int h = input.image.dim(1), w = input.image.dim(2);
            for (int c = 0; c < 3; ++c)
                for (std::int64_t m = 0; m < static_cast<std::int64_t>(h) * w; ++m)
                    input.image.data[static_cast<std::size_t>(c) * h * w + m] *=
                        item.missing.data[static_cast<std::size_t>(m)] *
                        item.background.data[static_cast<std::size_t>(m)];
            const TextureAtlas out = inpaint::unet_inpaint(net, input);
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) {
                    const std::size_t m = static_cast<std::size_t>(i) * w + j;
                    if (item.missing.data[m] != 0.0f || item.background.data[m] != 1.0f) continue;
                    const bool black = out.image.at(i, j, 0) <= 8 && out.image.at(i, j, 1) <= 8 &&
                                       out.image.at(i, j, 2) <= 8;
                    count += black;
                }
        }
        return count;
    };

    const int black_bg = residual_black(net_bg.net, eval_items);
    const int black_plain = residual_black(net_plain.net, eval_items);
    require(black_bg == 0, "background-mask model left " + std::to_string(black_bg) +
                               " residual black texels");
    require(black_plain > 0, "baseline unexpectedly left zero residual black texels");
    return "background masks: 0 residual black texels; baseline: " + std::to_string(black_plain);
}

// --------------------------------------------------------------------------
// 10. End-to-end determinism of the CLI pipeline.

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file()) {
            std::ifstream in(entry.path(), std::ios::binary);
            out[fs::relative(entry.path(), root).string()] =
                std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        }
    return out;
}

std::string criterion10() {
    const char* bin_env = std::getenv("MESHBOOST_BIN");
    const std::string bin = bin_env ? bin_env : "./meshboost";
    if (!fs::exists(bin)) throw CheckFailure{"meshboost binary not found at " + bin +
                                             " (set MESHBOOST_BIN)"};

    const fs::path dir = scratch_dir("criterion10");

    // Tiny models and a partial scan.
    ShapeTrainConfig scfg;
    scfg.desc.encoder_mlp = {3, 16, 32, 64};
    scfg.desc.encoder_dense = {64, 64};
    scfg.desc.n_z = 64;
    scfg.desc.decoder_mlp = {3 + 64, 64, 32, 3};
    scfg.num_shapes = 16;
    scfg.epochs = 3;
    scfg.encoder_points = 128;
    scfg.decoder_points = 128;
    scfg.seed = 1010;
    const ShapeTrainResult shape = train_shape_model(scfg);
    save_shape_model(shape.model, (dir / "shape.w3b").string());

    inpaint::InpaintTrainConfig icfg;
    icfg.desc.channels = {8, 16};
    icfg.corpus.num_images = 4;
    icfg.corpus.image_size = 64;
    icfg.iterations = 30;
    icfg.seed = 1011;
    const inpaint::InpaintTrainResult net = inpaint::train_inpainter(icfg);
    inpaint::save_inpaint_net(net.net, (dir / "inpaint.w3b").string());

    const TexturedMesh complete{body_template(1), make_body_texture(128, 55)};
    const TexturedMesh partial = cut_holes(complete, {13, 5, 0.07, 0.13});
    save_obj(partial, (dir / "partial.obj").string());

    PipelineConfig cfg;
    cfg.shape_model_path = (dir / "shape.w3b").string();
    cfg.inpaint_model_path = (dir / "inpaint.w3b").string();
    cfg.hires_resolution = 1;
    cfg.refine.iterations = 10;
    cfg.refine.partial_samples = 256;
    cfg.refine.decoded_samples = 256;
    cfg.refine.use_hires_template = false;
    cfg.completion_points = 128;
    cfg.transfer.atlas_width = 64;
    cfg.transfer.atlas_height = 64;
    std::ofstream((dir / "config.json").string()) << cfg.to_json();

    const auto run = [&](const std::string& outdir, int threads) {
        std::ostringstream cmd;
        cmd << "MESHBOOST_THREADS=" << threads << " " << bin << " pipeline --input "
            << (dir / "partial.obj") << " --outdir " << outdir << " --config "
            << (dir / "config.json") << " --seed 7 >/dev/null 2>&1";
        const int code = std::system(cmd.str().c_str());
        require(code == 0, "pipeline run failed with exit status " + std::to_string(code));
    };

    run((dir / "run_a").string(), 1);
    run((dir / "run_b").string(), 1);
    run((dir / "run_c").string(), 8);

    const auto a = tree_bytes(dir / "run_a");
    const auto b = tree_bytes(dir / "run_b");
    const auto c = tree_bytes(dir / "run_c");
    require(a.size() == b.size() && a.size() == c.size(), "output trees differ in file count");
    for (const auto& [rel, bytes] : a) {
        require(b.count(rel) && b.at(rel) == bytes, "rerun differs at " + rel);
        require(c.count(rel) && c.at(rel) == bytes, "thread-count run differs at " + rel);
    }
    return std::to_string(a.size()) + " files byte-identical across reruns and thread counts 1/8";
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<std::string()> run;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) only = std::atoi(argv[++i]);
    }

    const std::vector<Criterion> criteria = {
        {1, "Chamfer oracle equivalence", 10, criterion1},
        {2, "spatial-index oracles", 30, criterion2},
        {3, "partial-conv reduction to conv2d", 10, criterion3},
        {4, "background invariance", 30, criterion4},
        {5, "mask convergence", 10, criterion5},
        {6, "gradient checks", 60, criterion6},
        {7, "directed-vs-symmetric refinement", 600, criterion7},
        {8, "identity texture transfer", 60, criterion8},
        {9, "inpainting background-mask ablation", 900, criterion9},
        {10, "end-to-end determinism", 600, criterion10},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.id != only) continue;
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = criterion.run();
        } catch (const CheckFailure& f) {
            ok = false;
            detail = f.message;
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && seconds > criterion.budget_seconds) {
            ok = false;
            detail = "exceeded runtime budget: " + std::to_string(seconds) + "s > " +
                     std::to_string(criterion.budget_seconds) + "s";
        }
        std::printf("CRITERION %2d %-42s %s (%.1fs) %s\n", criterion.id, criterion.name,
                    ok ? "PASS" : "FAIL", seconds, detail.c_str());
        std::fflush(stdout);
        failures += !ok;
    }
    return failures;
}
