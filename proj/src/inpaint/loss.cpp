#include "meshboost/inpaint/loss.hpp"

#include <cmath>

namespace meshboost::inpaint {

namespace {

// Encoder-only pass of the extractor on an image (masks all-ones, background
// honored). Returns per-stage post-relu features and caches.
struct ExtractorRun {
    std::vector<Tensor> features;
    std::vector<PConvCache<float>> conv;
    std::vector<nn::ReluCache<float>> relu;
};

ExtractorRun run_extractor(const InpaintNet& net, const Tensor& image, const Tensor& background,
                           bool want_cache) {
    const int s = net.desc.stages();
    ExtractorRun run;
    run.conv.resize(s);
    run.relu.resize(s);
    Tensor current = image;
    Tensor mask(Tensor({image.dim(1), image.dim(2)}, 1.0f));
    Tensor bg = net.desc.use_background_mask ? background : Tensor();
    for (int stage = 0; stage < s; ++stage) {
        PConvInput<float> in = make_pconv_input(current, mask, bg);
        PConvOutput<float> out = partial_conv_forward(
            in, net.weights.at("enc" + std::to_string(stage) + ".W"),
            net.weights.at("enc" + std::to_string(stage) + ".b"), 2, 1,
            want_cache ? &run.conv[static_cast<std::size_t>(stage)] : nullptr);
        out.y = nn::relu_forward(out.y, want_cache ? &run.relu[static_cast<std::size_t>(stage)] : nullptr);
        current = out.y;
        mask = std::move(out.mask);
        if (!bg.empty()) bg = std::move(out.background);
        run.features.push_back(current);
    }
    return run;
}

// Gram matrix [C,C] of a [C,H,W] feature map, normalized by C*H*W.
std::vector<double> gram(const Tensor& f) {
    const int c = f.dim(0);
    const std::int64_t hw = static_cast<std::int64_t>(f.dim(1)) * f.dim(2);
    const double norm = 1.0 / (static_cast<double>(c) * hw);
    std::vector<double> g(static_cast<std::size_t>(c) * c, 0.0);
    for (int a = 0; a < c; ++a)
        for (int b = a; b < c; ++b) {
            double acc = 0.0;
            for (std::int64_t i = 0; i < hw; ++i)
                acc += static_cast<double>(f.data[static_cast<std::size_t>(a) * hw + i]) *
                       static_cast<double>(f.data[static_cast<std::size_t>(b) * hw + i]);
            g[static_cast<std::size_t>(a) * c + b] = acc * norm;
            g[static_cast<std::size_t>(b) * c + a] = acc * norm;
        }
    return g;
}

} // namespace

LossResult loss_inpaint(const Tensor& pred, const Tensor& ground_truth, const Tensor& missing,
                        const Tensor& background, const InpaintNet& extractor,
                        const LossWeights& weights, bool want_grad) {
    nn::require_shape(ground_truth, pred.shape, "loss ground truth");
    const int c = pred.dim(0), h = pred.dim(1), w = pred.dim(2);
    nn::require_shape(missing, {h, w}, "loss missing mask");
    nn::require_shape(background, {h, w}, "loss background mask");

    LossResult result;
    if (want_grad) result.grad_pred = Tensor({c, h, w});

    // Pixel L1 terms on the raw prediction.
    std::int64_t hole_count = 0, valid_count = 0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const std::size_t m = static_cast<std::size_t>(i) * w + j;
            if (background.data[m] == 0.0f) continue;
            (missing.data[m] == 0.0f ? hole_count : valid_count)++;
        }
    double hole_sum = 0.0, valid_sum = 0.0;
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const std::size_t m = static_cast<std::size_t>(i) * w + j;
                if (background.data[m] == 0.0f) continue;
                const std::size_t idx = (static_cast<std::size_t>(ci) * h + i) * w + j;
                const double diff = static_cast<double>(pred.data[idx]) - ground_truth.data[idx];
                const bool in_hole = missing.data[m] == 0.0f;
                (in_hole ? hole_sum : valid_sum) += std::abs(diff);
                if (want_grad) {
                    const double denom = static_cast<double>(in_hole ? hole_count : valid_count) * c;
                    const double lambda = in_hole ? weights.hole : weights.valid;
                    if (denom > 0)
                        result.grad_pred.data[idx] +=
                            static_cast<float>(lambda * (diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0)) / denom);
                }
            }
    result.hole = hole_count > 0 ? hole_sum / (static_cast<double>(hole_count) * c) : 0.0;
    result.valid = valid_count > 0 ? valid_sum / (static_cast<double>(valid_count) * c) : 0.0;

    // Composited image: known foreground from ground truth, holes from the
    // prediction. With M stored as 1 on background, the composite equals the
    // ground truth there, so downstream terms see no prediction values
    // outside the holes.
    Tensor comp({c, h, w});
    for (int ci = 0; ci < c; ++ci)
        for (std::int64_t m = 0; m < static_cast<std::int64_t>(h) * w; ++m) {
            const std::size_t idx = static_cast<std::size_t>(ci) * h * w + m;
            comp.data[idx] = missing.data[static_cast<std::size_t>(m)] == 1.0f
                                 ? ground_truth.data[idx]
                                 : pred.data[idx];
        }
    Tensor grad_comp;
    if (want_grad) grad_comp = Tensor({c, h, w});

    // Style term: L1 between Gram matrices of extractor stages.
    if (weights.style != 0.0) {
        ExtractorRun run_comp = run_extractor(extractor, comp, background, want_grad);
        ExtractorRun run_gt = run_extractor(extractor, ground_truth, background, false);
        const int stages = static_cast<int>(run_comp.features.size());
        std::vector<Tensor> feature_grads(static_cast<std::size_t>(stages));
        for (int s = 0; s < stages; ++s) {
            const Tensor& f = run_comp.features[static_cast<std::size_t>(s)];
            const auto g_comp = gram(f);
            const auto g_gt = gram(run_gt.features[static_cast<std::size_t>(s)]);
            const int fc = f.dim(0);
            const std::int64_t hw = static_cast<std::int64_t>(f.dim(1)) * f.dim(2);
            double term = 0.0;
            std::vector<double> sign(g_comp.size());
            for (std::size_t i = 0; i < g_comp.size(); ++i) {
                const double d = g_comp[i] - g_gt[i];
                term += std::abs(d);
                sign[i] = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
            }
            result.style += term;
            if (want_grad) {
                // dL/dF = 2/(C*H*W) * S * F with S the (symmetric) sign matrix.
                Tensor& fg = feature_grads[static_cast<std::size_t>(s)];
                fg = Tensor(f.shape);
                const double norm = 2.0 / (static_cast<double>(fc) * hw);
                for (int a = 0; a < fc; ++a)
                    for (std::int64_t i = 0; i < hw; ++i) {
                        double acc = 0.0;
                        for (int bch = 0; bch < fc; ++bch)
                            acc += sign[static_cast<std::size_t>(a) * fc + bch] *
                                   static_cast<double>(f.data[static_cast<std::size_t>(bch) * hw + i]);
                        fg.data[static_cast<std::size_t>(a) * hw + i] = static_cast<float>(acc * norm);
                    }
            }
        }
        if (want_grad) {
            // Backward through the frozen encoder, accumulating stage grads.
            Tensor g = feature_grads[static_cast<std::size_t>(stages - 1)];
            for (auto& v : g.data) v *= static_cast<float>(weights.style);
            for (int s = stages - 1; s >= 0; --s) {
                g = nn::relu_backward(run_comp.relu[static_cast<std::size_t>(s)], g);
                PConvGrads<float> pg = partial_conv_backward(run_comp.conv[static_cast<std::size_t>(s)], g);
                g = std::move(pg.x);
                if (s > 0) {
                    const Tensor& extra = feature_grads[static_cast<std::size_t>(s - 1)];
                    for (std::size_t i = 0; i < g.data.size(); ++i)
                        g.data[i] += static_cast<float>(weights.style) * extra.data[i];
                }
            }
            for (std::size_t i = 0; i < grad_comp.data.size(); ++i) grad_comp.data[i] += g.data[i];
        }
    }

    // Total variation over the dilated missing region, foreground only.
    if (weights.tv != 0.0) {
        std::vector<char> region(static_cast<std::size_t>(h) * w, 0);
        std::int64_t region_count = 0;
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                bool near_hole = false;
                for (int di = -1; di <= 1 && !near_hole; ++di)
                    for (int dj = -1; dj <= 1 && !near_hole; ++dj) {
                        const int ii = i + di, jj = j + dj;
                        if (ii < 0 || ii >= h || jj < 0 || jj >= w) continue;
                        near_hole = missing.data[static_cast<std::size_t>(ii) * w + jj] == 0.0f;
                    }
                if (near_hole && background.data[static_cast<std::size_t>(i) * w + j] == 1.0f) {
                    region[static_cast<std::size_t>(i) * w + j] = 1;
                    ++region_count;
                }
            }
        if (region_count > 0) {
            const double norm = 1.0 / (static_cast<double>(region_count) * c);
            double tv_sum = 0.0;
            for (int ci = 0; ci < c; ++ci)
                for (int i = 0; i < h; ++i)
                    for (int j = 0; j < w; ++j) {
                        const std::size_t m = static_cast<std::size_t>(i) * w + j;
                        if (!region[m]) continue;
                        const std::size_t idx = (static_cast<std::size_t>(ci) * h + i) * w + j;
                        if (j + 1 < w && region[m + 1]) {
                            const double d = static_cast<double>(comp.data[idx + 1]) - comp.data[idx];
                            tv_sum += std::abs(d);
                            if (want_grad) {
                                const float s = static_cast<float>(weights.tv * norm *
                                                                   (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)));
                                grad_comp.data[idx + 1] += s;
                                grad_comp.data[idx] -= s;
                            }
                        }
                        if (i + 1 < h && region[m + static_cast<std::size_t>(w)]) {
                            const double d =
                                static_cast<double>(comp.data[idx + static_cast<std::size_t>(w)]) - comp.data[idx];
                            tv_sum += std::abs(d);
                            if (want_grad) {
                                const float s = static_cast<float>(weights.tv * norm *
                                                                   (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)));
                                grad_comp.data[idx + static_cast<std::size_t>(w)] += s;
                                grad_comp.data[idx] -= s;
                            }
                        }
                    }
            result.tv = tv_sum * norm;
        }
    }

    if (want_grad && !grad_comp.empty()) {
        // comp depends on pred only inside holes.
        for (int ci = 0; ci < c; ++ci)
            for (std::int64_t m = 0; m < static_cast<std::int64_t>(h) * w; ++m)
                if (missing.data[static_cast<std::size_t>(m)] == 0.0f)
                    result.grad_pred.data[static_cast<std::size_t>(ci) * h * w + m] +=
                        grad_comp.data[static_cast<std::size_t>(ci) * h * w + m];
    }

    result.total = weights.hole * result.hole + weights.valid * result.valid +
                   weights.style * result.style + weights.tv * result.tv;
    return result;
}

} // namespace meshboost::inpaint
