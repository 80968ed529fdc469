#pragma once

#include <cmath>
#include <vector>

#include "meshboost/core/parallel.hpp"
#include "meshboost/nn/tensor.hpp"

// Forward/backward kernels for the layer set used by the shape network and
// the inpainting network. Reductions accumulate in double regardless of the
// storage type; parallel regions write disjoint outputs so results are
// identical for every thread count.

namespace meshboost::nn {

// ---------------------------------------------------------------------------
// Dense: y = x W + b, row-wise.

template <typename T>
struct DenseCache {
    TensorT<T> x, W;
    bool recorded = false;
};

template <typename T>
struct DenseGrads {
    TensorT<T> x, W, b;
};

template <typename T>
TensorT<T> dense_forward(const TensorT<T>& x, const TensorT<T>& W, const TensorT<T>& b,
                         DenseCache<T>* cache = nullptr) {
    require_ndim(x, 2, "dense x");
    require_ndim(W, 2, "dense W");
    if (x.dim(1) != W.dim(0))
        throw ShapeError("dense: x " + shape_str(x.shape) + " does not match W " + shape_str(W.shape));
    require_shape(b, {W.dim(1)}, "dense b");
    const int n = x.dim(0), din = x.dim(1), dout = W.dim(1);
    TensorT<T> y({n, dout});
    parallel_for(0, n, [&](std::int64_t i) {
        for (int j = 0; j < dout; ++j) {
            double acc = static_cast<double>(b[static_cast<std::size_t>(j)]);
            for (int k = 0; k < din; ++k)
                acc += static_cast<double>(x.at2(static_cast<int>(i), k)) * static_cast<double>(W.at2(k, j));
            y.at2(static_cast<int>(i), j) = static_cast<T>(acc);
        }
    });
    if (cache) {
        cache->x = x;
        cache->W = W;
        cache->recorded = true;
    }
    return y;
}

template <typename T>
DenseGrads<T> dense_backward(const DenseCache<T>& cache, const TensorT<T>& gy) {
    if (!cache.recorded) throw ValidationError("dense_backward: no recorded forward pass");
    const TensorT<T>& x = cache.x;
    const TensorT<T>& W = cache.W;
    const int n = x.dim(0), din = x.dim(1), dout = W.dim(1);
    require_shape(gy, {n, dout}, "dense gy");
    DenseGrads<T> g{TensorT<T>({n, din}), TensorT<T>({din, dout}), TensorT<T>({dout})};
    parallel_for(0, n, [&](std::int64_t i) {
        for (int k = 0; k < din; ++k) {
            double acc = 0.0;
            for (int j = 0; j < dout; ++j)
                acc += static_cast<double>(gy.at2(static_cast<int>(i), j)) * static_cast<double>(W.at2(k, j));
            g.x.at2(static_cast<int>(i), k) = static_cast<T>(acc);
        }
    });
    parallel_for(0, din, [&](std::int64_t k) {
        for (int j = 0; j < dout; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += static_cast<double>(x.at2(i, static_cast<int>(k))) * static_cast<double>(gy.at2(i, j));
            g.W.at2(static_cast<int>(k), j) = static_cast<T>(acc);
        }
    });
    for (int j = 0; j < dout; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += static_cast<double>(gy.at2(i, j));
        g.b[static_cast<std::size_t>(j)] = static_cast<T>(acc);
    }
    return g;
}

// ---------------------------------------------------------------------------
// ReLU.

template <typename T>
struct ReluCache {
    TensorT<T> x;
    bool recorded = false;
};

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& x, ReluCache<T>* cache = nullptr) {
    TensorT<T> y = x;
    for (auto& v : y.data) v = v > T(0) ? v : T(0);
    if (cache) {
        cache->x = x;
        cache->recorded = true;
    }
    return y;
}

template <typename T>
TensorT<T> relu_backward(const ReluCache<T>& cache, const TensorT<T>& gy) {
    if (!cache.recorded) throw ValidationError("relu_backward: no recorded forward pass");
    require_shape(gy, cache.x.shape, "relu gy");
    TensorT<T> gx = gy;
    for (std::size_t i = 0; i < gx.data.size(); ++i)
        if (!(cache.x.data[i] > T(0))) gx.data[i] = T(0);
    return gx;
}

// ---------------------------------------------------------------------------
// Shared MLP over point rows: alternating dense + ReLU. The same weights are
// applied to every row, which is what makes the encoder permutation
// equivariant.

template <typename T>
struct MlpLayer {
    TensorT<T> W, b;
};

template <typename T>
struct MlpCache {
    std::vector<DenseCache<T>> dense;
    std::vector<ReluCache<T>> relu;
    bool relu_last = false;
    bool recorded = false;
};

template <typename T>
TensorT<T> pointwise_mlp_forward(const TensorT<T>& points, const std::vector<MlpLayer<T>>& layers,
                                 bool relu_last, MlpCache<T>* cache = nullptr) {
    if (layers.empty()) throw ValidationError("pointwise_mlp: no layers");
    if (cache) {
        cache->dense.resize(layers.size());
        cache->relu.resize(layers.size());
        cache->relu_last = relu_last;
    }
    TensorT<T> h = points;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        h = dense_forward(h, layers[l].W, layers[l].b, cache ? &cache->dense[l] : nullptr);
        if (l + 1 < layers.size() || relu_last)
            h = relu_forward(h, cache ? &cache->relu[l] : nullptr);
    }
    if (cache) cache->recorded = true;
    return h;
}

template <typename T>
struct MlpGrads {
    TensorT<T> x;
    std::vector<DenseGrads<T>> layers; // W/b per layer
};

template <typename T>
MlpGrads<T> pointwise_mlp_backward(const MlpCache<T>& cache, const TensorT<T>& gy) {
    if (!cache.recorded) throw ValidationError("pointwise_mlp_backward: no recorded forward pass");
    const std::size_t L = cache.dense.size();
    MlpGrads<T> grads;
    grads.layers.resize(L);
    TensorT<T> g = gy;
    for (std::size_t l = L; l-- > 0;) {
        if (l + 1 < L || cache.relu_last) g = relu_backward(cache.relu[l], g);
        DenseGrads<T> dg = dense_backward(cache.dense[l], g);
        grads.layers[l] = {TensorT<T>(), std::move(dg.W), std::move(dg.b)};
        g = std::move(dg.x);
    }
    grads.x = std::move(g);
    return grads;
}

// ---------------------------------------------------------------------------
// Max pool across rows; ties route the gradient to the lowest row index.

template <typename T>
struct MaxPoolCache {
    std::vector<int> argmax;
    int rows = 0;
    bool recorded = false;
};

template <typename T>
TensorT<T> max_pool_points(const TensorT<T>& x, MaxPoolCache<T>* cache = nullptr) {
    require_ndim(x, 2, "max_pool x");
    const int n = x.dim(0), d = x.dim(1);
    if (n < 1) throw ValidationError("max_pool_points: empty input");
    TensorT<T> y({d});
    std::vector<int> argmax(d, 0);
    for (int j = 0; j < d; ++j) {
        T best = x.at2(0, j);
        int arg = 0;
        for (int i = 1; i < n; ++i)
            if (x.at2(i, j) > best) {
                best = x.at2(i, j);
                arg = i;
            }
        y[static_cast<std::size_t>(j)] = best;
        argmax[static_cast<std::size_t>(j)] = arg;
    }
    if (cache) {
        cache->argmax = std::move(argmax);
        cache->rows = n;
        cache->recorded = true;
    }
    return y;
}

template <typename T>
TensorT<T> max_pool_points_backward(const MaxPoolCache<T>& cache, const TensorT<T>& gy) {
    if (!cache.recorded) throw ValidationError("max_pool_backward: no recorded forward pass");
    const int d = static_cast<int>(cache.argmax.size());
    require_shape(gy, {d}, "max_pool gy");
    TensorT<T> gx({cache.rows, d});
    for (int j = 0; j < d; ++j) gx.at2(cache.argmax[static_cast<std::size_t>(j)], j) = gy[static_cast<std::size_t>(j)];
    return gx;
}

// ---------------------------------------------------------------------------
// 2D convolution (cross-correlation), zero padding, odd kernels.

template <typename T>
struct Conv2dCache {
    TensorT<T> x, W;
    int stride = 1, pad = 0;
    bool recorded = false;
};

template <typename T>
struct Conv2dGrads {
    TensorT<T> x, W, b;
};

inline int conv_out_size(int in, int pad, int k, int stride) {
    return (in + 2 * pad - k) / stride + 1;
}

template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& x, const TensorT<T>& W, const TensorT<T>& b, int stride,
                          int pad, Conv2dCache<T>* cache = nullptr) {
    require_ndim(x, 3, "conv2d x");
    require_ndim(W, 4, "conv2d W");
    const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int cout = W.dim(0), k = W.dim(2);
    if (W.dim(1) != cin || W.dim(3) != k)
        throw ShapeError("conv2d: x " + shape_str(x.shape) + " does not match W " + shape_str(W.shape));
    if (k % 2 == 0) throw ValidationError("conv2d: kernel size must be odd");
    if (stride < 1 || pad < 0) throw ValidationError("conv2d: bad stride/padding");
    require_shape(b, {cout}, "conv2d b");
    const int oh = conv_out_size(h, pad, k, stride), ow = conv_out_size(w, pad, k, stride);
    if (oh < 1 || ow < 1) throw ShapeError("conv2d: output would be empty for x " + shape_str(x.shape));

    TensorT<T> y({cout, oh, ow});
    parallel_for(0, static_cast<std::int64_t>(cout) * oh, [&](std::int64_t idx) {
        const int co = static_cast<int>(idx / oh);
        const int oy = static_cast<int>(idx % oh);
        for (int ox = 0; ox < ow; ++ox) {
            double acc = static_cast<double>(b[static_cast<std::size_t>(co)]);
            for (int ci = 0; ci < cin; ++ci)
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < k; ++kx) {
                        const int ix = ox * stride - pad + kx;
                        if (ix < 0 || ix >= w) continue;
                        acc += static_cast<double>(x.data[(static_cast<std::size_t>(ci) * h + iy) * w + ix]) *
                               static_cast<double>(W.data[((static_cast<std::size_t>(co) * cin + ci) * k + ky) * k + kx]);
                    }
                }
            y.data[(static_cast<std::size_t>(co) * oh + oy) * ow + ox] = static_cast<T>(acc);
        }
    });
    if (cache) {
        cache->x = x;
        cache->W = W;
        cache->stride = stride;
        cache->pad = pad;
        cache->recorded = true;
    }
    return y;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const Conv2dCache<T>& cache, const TensorT<T>& gy) {
    if (!cache.recorded) throw ValidationError("conv2d_backward: no recorded forward pass");
    const TensorT<T>& x = cache.x;
    const TensorT<T>& W = cache.W;
    const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int cout = W.dim(0), k = W.dim(2);
    const int stride = cache.stride, pad = cache.pad;
    const int oh = conv_out_size(h, pad, k, stride), ow = conv_out_size(w, pad, k, stride);
    require_shape(gy, {cout, oh, ow}, "conv2d gy");

    Conv2dGrads<T> g{TensorT<T>({cin, h, w}), TensorT<T>({cout, cin, k, k}), TensorT<T>({cout})};

    // Input gradient, gather form: every input pixel collects the output
    // positions whose window covered it.
    parallel_for(0, static_cast<std::int64_t>(cin) * h, [&](std::int64_t idx) {
        const int ci = static_cast<int>(idx / h);
        const int iy = static_cast<int>(idx % h);
        for (int ix = 0; ix < w; ++ix) {
            double acc = 0.0;
            for (int ky = 0; ky < k; ++ky) {
                const int num_y = iy + pad - ky;
                if (num_y < 0 || num_y % stride != 0) continue;
                const int oy = num_y / stride;
                if (oy >= oh) continue;
                for (int kx = 0; kx < k; ++kx) {
                    const int num_x = ix + pad - kx;
                    if (num_x < 0 || num_x % stride != 0) continue;
                    const int ox = num_x / stride;
                    if (ox >= ow) continue;
                    for (int co = 0; co < cout; ++co)
                        acc += static_cast<double>(gy.data[(static_cast<std::size_t>(co) * oh + oy) * ow + ox]) *
                               static_cast<double>(W.data[((static_cast<std::size_t>(co) * cin + ci) * k + ky) * k + kx]);
                }
            }
            g.x.data[(static_cast<std::size_t>(ci) * h + iy) * w + ix] = static_cast<T>(acc);
        }
    });

    parallel_for(0, static_cast<std::int64_t>(cout) * cin, [&](std::int64_t idx) {
        const int co = static_cast<int>(idx / cin);
        const int ci = static_cast<int>(idx % cin);
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
                double acc = 0.0;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride - pad + kx;
                        if (ix < 0 || ix >= w) continue;
                        acc += static_cast<double>(gy.data[(static_cast<std::size_t>(co) * oh + oy) * ow + ox]) *
                               static_cast<double>(x.data[(static_cast<std::size_t>(ci) * h + iy) * w + ix]);
                    }
                }
                g.W.data[((static_cast<std::size_t>(co) * cin + ci) * k + ky) * k + kx] = static_cast<T>(acc);
            }
    });

    for (int co = 0; co < cout; ++co) {
        double acc = 0.0;
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                acc += static_cast<double>(gy.data[(static_cast<std::size_t>(co) * oh + oy) * ow + ox]);
        g.b[static_cast<std::size_t>(co)] = static_cast<T>(acc);
    }
    return g;
}

} // namespace meshboost::nn
