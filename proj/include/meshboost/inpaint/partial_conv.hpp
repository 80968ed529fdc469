#pragma once

#include <cmath>
#include <vector>

#include "meshboost/core/parallel.hpp"
#include "meshboost/nn/layers.hpp"

// Mask-aware convolution: output windows are renormalized over the valid
// entries (missing-texture mask times background mask) and the missing mask
// is unmasked wherever a window saw at least one valid value. The background
// mask is carried unchanged through layers by center-tap subsampling.
//
// Conventions: masks are {0,1}; zero padding counts as valid with value 0,
// which makes the all-valid case equal to a standard convolution everywhere
// including borders. Input channels may be split into groups with separate
// missing masks (used after skip concatenation, where upsampled and skip
// features have different masks); with a single group this is exactly the
// published formulation.

namespace meshboost::inpaint {

using nn::TensorT;

template <typename T>
struct PConvInput {
    TensorT<T> x;                          // [Cin,H,W]
    std::vector<TensorT<T>> group_masks;   // per group, [H,W]
    std::vector<int> group_sizes;          // channels per group, sums to Cin
    TensorT<T> background;                 // [H,W]; empty = no background mask (all foreground)
};

template <typename T>
struct PConvOutput {
    TensorT<T> y;           // [Cout,H',W']
    TensorT<T> mask;        // [H',W'] updated missing mask
    TensorT<T> background;  // [H',W'] propagated M_b (empty when input empty)
};

template <typename T>
struct PConvCache {
    TensorT<T> x, W;
    std::vector<TensorT<T>> valid;  // per group, [H,W], includes background
    std::vector<int> group_sizes;
    TensorT<T> ratio;               // [H',W'] renormalization factor, 0 where dead
    int stride = 1, pad = 0;
    bool recorded = false;
};

template <typename T>
struct PConvGrads {
    TensorT<T> x, W, b;
};

template <typename T>
TensorT<T> propagate_background_mask(const TensorT<T>& mb, int stride) {
    nn::require_ndim(mb, 2, "propagate_background_mask");
    if (stride == 1) return mb;
    if (stride != 2) throw ValidationError("propagate_background_mask: stride must be 1 or 2");
    const int h = mb.dim(0), w = mb.dim(1);
    TensorT<T> out({(h + 1) / 2, (w + 1) / 2});
    for (int i = 0; i < out.dim(0); ++i)
        for (int j = 0; j < out.dim(1); ++j)
            out.data[static_cast<std::size_t>(i) * out.dim(1) + j] =
                mb.data[static_cast<std::size_t>(2 * i) * w + 2 * j];
    return out;
}

template <typename T>
void require_binary(const TensorT<T>& m, const char* what) {
    for (const T v : m.data)
        if (v != T(0) && v != T(1)) throw ValidationError(std::string(what) + ": mask is not binary");
}

template <typename T>
PConvOutput<T> partial_conv_forward(const PConvInput<T>& in, const TensorT<T>& W, const TensorT<T>& b,
                                    int stride, int pad, PConvCache<T>* cache = nullptr) {
    nn::require_ndim(in.x, 3, "partial_conv x");
    nn::require_ndim(W, 4, "partial_conv W");
    const int cin = in.x.dim(0), h = in.x.dim(1), w = in.x.dim(2);
    const int cout = W.dim(0), k = W.dim(2);
    if (W.dim(1) != cin || W.dim(3) != k)
        throw ShapeError("partial_conv: x " + nn::shape_str(in.x.shape) + " does not match W " +
                         nn::shape_str(W.shape));
    if (k % 2 == 0) throw ValidationError("partial_conv: kernel size must be odd");
    if (stride != 1 && stride != 2) throw ValidationError("partial_conv: stride must be 1 or 2");
    nn::require_shape(b, {cout}, "partial_conv b");
    if (in.group_masks.size() != in.group_sizes.size() || in.group_masks.empty())
        throw ValidationError("partial_conv: group masks and sizes disagree");
    int total = 0;
    for (int g : in.group_sizes) total += g;
    if (total != cin) throw ShapeError("partial_conv: group sizes do not sum to input channels");
    const bool has_bg = !in.background.empty();
    for (const auto& m : in.group_masks) {
        nn::require_shape(m, {h, w}, "partial_conv mask");
        require_binary(m, "partial_conv");
    }
    if (has_bg) {
        nn::require_shape(in.background, {h, w}, "partial_conv background mask");
        require_binary(in.background, "partial_conv");
    }

    const int ngroups = static_cast<int>(in.group_masks.size());
    // Per-group validity = M .* M_b.
    std::vector<TensorT<T>> valid(ngroups);
    for (int g = 0; g < ngroups; ++g) {
        valid[g] = in.group_masks[g];
        if (has_bg)
            for (std::size_t i = 0; i < valid[g].data.size(); ++i)
                valid[g].data[i] *= in.background.data[i];
    }

    const int oh = nn::conv_out_size(h, pad, k, stride), ow = nn::conv_out_size(w, pad, k, stride);
    if (oh < 1 || ow < 1) throw ShapeError("partial_conv: output would be empty");

    PConvOutput<T> out;
    out.y = TensorT<T>({cout, oh, ow});
    out.mask = TensorT<T>({oh, ow});
    TensorT<T> ratio({oh, ow});
    const double window_total = static_cast<double>(k) * k * cin; // sum(1)

    // Channel offset of each group.
    std::vector<int> group_offset(ngroups, 0);
    for (int g = 1; g < ngroups; ++g) group_offset[g] = group_offset[g - 1] + in.group_sizes[g - 1];

    parallel_for(0, oh, [&](std::int64_t oy_) {
        const int oy = static_cast<int>(oy_);
        for (int ox = 0; ox < ow; ++ox) {
            // Count valid entries: padding is valid, in-bounds entries use
            // the group validity map.
            double denom = 0.0;
            for (int g = 0; g < ngroups; ++g) {
                double count = 0.0;
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = oy * stride - pad + ky;
                    for (int kx = 0; kx < k; ++kx) {
                        const int ix = ox * stride - pad + kx;
                        if (iy < 0 || iy >= h || ix < 0 || ix >= w)
                            count += 1.0;
                        else
                            count += static_cast<double>(valid[g].data[static_cast<std::size_t>(iy) * w + ix]);
                    }
                }
                denom += count * in.group_sizes[g];
            }
            const std::size_t oidx = static_cast<std::size_t>(oy) * ow + ox;
            out.mask.data[oidx] = denom > 0.0 ? T(1) : T(0);
            ratio.data[oidx] = denom > 0.0 ? static_cast<T>(window_total / denom) : T(0);
            if (denom <= 0.0) {
                for (int co = 0; co < cout; ++co)
                    out.y.data[(static_cast<std::size_t>(co) * oh + oy) * ow + ox] = T(0);
                continue;
            }
            for (int co = 0; co < cout; ++co) {
                double acc = 0.0;
                for (int g = 0; g < ngroups; ++g)
                    for (int ci = group_offset[g]; ci < group_offset[g] + in.group_sizes[g]; ++ci)
                        for (int ky = 0; ky < k; ++ky) {
                            const int iy = oy * stride - pad + ky;
                            if (iy < 0 || iy >= h) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                const int ix = ox * stride - pad + kx;
                                if (ix < 0 || ix >= w) continue;
                                const std::size_t iidx = static_cast<std::size_t>(iy) * w + ix;
                                acc += static_cast<double>(W.data[((static_cast<std::size_t>(co) * cin + ci) * k + ky) * k + kx]) *
                                       static_cast<double>(in.x.data[(static_cast<std::size_t>(ci) * h + iy) * w + ix]) *
                                       static_cast<double>(valid[g].data[iidx]);
                            }
                        }
                out.y.data[(static_cast<std::size_t>(co) * oh + oy) * ow + ox] =
                    static_cast<T>(acc * static_cast<double>(ratio.data[oidx]) +
                                   static_cast<double>(b.data[static_cast<std::size_t>(co)]));
            }
        }
    });

    if (has_bg) out.background = propagate_background_mask(in.background, stride);

    if (cache) {
        cache->x = in.x;
        cache->W = W;
        cache->valid = valid;
        cache->group_sizes = in.group_sizes;
        cache->ratio = ratio;
        cache->stride = stride;
        cache->pad = pad;
        cache->recorded = true;
    }
    return out;
}

template <typename T>
PConvGrads<T> partial_conv_backward(const PConvCache<T>& cache, const TensorT<T>& gy) {
    if (!cache.recorded) throw ValidationError("partial_conv_backward: no recorded forward pass");
    const TensorT<T>& x = cache.x;
    const TensorT<T>& W = cache.W;
    const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int cout = W.dim(0), k = W.dim(2);
    const int stride = cache.stride, pad = cache.pad;
    const int oh = nn::conv_out_size(h, pad, k, stride), ow = nn::conv_out_size(w, pad, k, stride);
    nn::require_shape(gy, {cout, oh, ow}, "partial_conv gy");

    // Channel -> group validity lookup.
    std::vector<const TensorT<T>*> channel_valid(cin);
    {
        int c = 0;
        for (std::size_t g = 0; g < cache.group_sizes.size(); ++g)
            for (int i = 0; i < cache.group_sizes[static_cast<std::size_t>(g)]; ++i)
                channel_valid[static_cast<std::size_t>(c++)] = &cache.valid[g];
    }

    PConvGrads<T> grads{TensorT<T>({cin, h, w}), TensorT<T>({cout, cin, k, k}), TensorT<T>({cout})};

    // d/dx, gather form, masked by validity (dead windows have ratio 0).
    parallel_for(0, static_cast<std::int64_t>(cin) * h, [&](std::int64_t idx) {
        const int ci = static_cast<int>(idx / h);
        const int iy = static_cast<int>(idx % h);
        const TensorT<T>& valid = *channel_valid[static_cast<std::size_t>(ci)];
        for (int ix = 0; ix < w; ++ix) {
            const std::size_t iidx = static_cast<std::size_t>(iy) * w + ix;
            if (valid.data[iidx] == T(0)) {
                grads.x.data[(static_cast<std::size_t>(ci) * h + iy) * w + ix] = T(0);
                continue;
            }
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
                    const double r = static_cast<double>(cache.ratio.data[static_cast<std::size_t>(oy) * ow + ox]);
                    if (r == 0.0) continue;
                    for (int co = 0; co < cout; ++co)
                        acc += static_cast<double>(gy.data[(static_cast<std::size_t>(co) * oh + oy) * ow + ox]) * r *
                               static_cast<double>(W.data[((static_cast<std::size_t>(co) * cin + ci) * k + ky) * k + kx]);
                }
            }
            grads.x.data[(static_cast<std::size_t>(ci) * h + iy) * w + ix] = static_cast<T>(acc);
        }
    });

    parallel_for(0, static_cast<std::int64_t>(cout) * cin, [&](std::int64_t idx) {
        const int co = static_cast<int>(idx / cin);
        const int ci = static_cast<int>(idx % cin);
        const TensorT<T>& valid = *channel_valid[static_cast<std::size_t>(ci)];
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
                double acc = 0.0;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride - pad + kx;
                        if (ix < 0 || ix >= w) continue;
                        const std::size_t iidx = static_cast<std::size_t>(iy) * w + ix;
                        if (valid.data[iidx] == T(0)) continue;
                        const double r = static_cast<double>(cache.ratio.data[static_cast<std::size_t>(oy) * ow + ox]);
                        if (r == 0.0) continue;
                        acc += static_cast<double>(gy.data[(static_cast<std::size_t>(co) * oh + oy) * ow + ox]) * r *
                               static_cast<double>(x.data[(static_cast<std::size_t>(ci) * h + iy) * w + ix]);
                    }
                }
                grads.W.data[((static_cast<std::size_t>(co) * cin + ci) * k + ky) * k + kx] = static_cast<T>(acc);
            }
    });

    for (int co = 0; co < cout; ++co) {
        double acc = 0.0;
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                if (cache.ratio.data[static_cast<std::size_t>(oy) * ow + ox] != T(0))
                    acc += static_cast<double>(gy.data[(static_cast<std::size_t>(co) * oh + oy) * ow + ox]);
        grads.b.data[static_cast<std::size_t>(co)] = static_cast<T>(acc);
    }
    return grads;
}

// Convenience wrapper for the common single-mask case.
template <typename T>
PConvInput<T> make_pconv_input(TensorT<T> x, TensorT<T> mask, TensorT<T> background) {
    PConvInput<T> in;
    in.group_sizes = {x.dim(0)};
    in.x = std::move(x);
    in.group_masks = {std::move(mask)};
    in.background = std::move(background);
    return in;
}

} // namespace meshboost::inpaint
