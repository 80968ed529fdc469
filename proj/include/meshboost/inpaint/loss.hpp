#pragma once

#include "meshboost/inpaint/unet.hpp"

namespace meshboost::inpaint {

struct LossWeights {
    double hole = 6.0;
    double valid = 1.0;
    double style = 120.0;
    double tv = 0.1;
};

struct LossResult {
    double total = 0.0;
    double hole = 0.0, valid = 0.0, style = 0.0, tv = 0.0; // unweighted terms
    Tensor grad_pred; // d(total)/d(pred)
};

// Training loss. Pixel L1 terms compare the raw prediction against the
// ground truth separately over missing and known foreground; the style term
// compares Gram matrices of the frozen feature extractor's stage activations
// on the composited image; TV smooths the composited image over the missing
// region dilated by one pixel. Background pixels influence no term.
// `extractor` supplies the feature stages (the inpainting net's own encoder,
// weights treated as constants).
LossResult loss_inpaint(const Tensor& pred, const Tensor& ground_truth, const Tensor& missing,
                        const Tensor& background, const InpaintNet& extractor,
                        const LossWeights& weights, bool want_grad = true);

} // namespace meshboost::inpaint
