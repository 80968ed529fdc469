#pragma once

#include "meshboost/core/image.hpp"
#include "meshboost/mesh/mesh.hpp"

namespace meshboost {

// M: 255 where the texel's color is known, 0 where texture is missing.
// M_b: 255 on chart foreground, 0 on background. Background texels carry
// M = 255 so that only genuinely missing data is marked; the background is
// excluded separately by M_b everywhere it matters.
struct MaskPair {
    Image8 missing;    // M
    Image8 background; // M_b

    void validate() const {
        if (missing.width() != background.width() || missing.height() != background.height())
            throw ValidationError("MaskPair: mask dimensions disagree");
        if (missing.channels() != 1 || background.channels() != 1)
            throw ValidationError("MaskPair: masks must be single-channel");
    }
};

// Black texels inside the charts mark missing texture: M(i,j)=0 iff
// M_b(i,j)=255 and every channel of the atlas is <= threshold_black.
MaskPair derive_masks(const TextureAtlas& atlas, const Image8& background_mask,
                      int threshold_black = 0);

// Diagnostic false-color render: background gray, missing texels white,
// known texels passed through.
Image8 apply_masks_to_image(const TextureAtlas& atlas, const MaskPair& masks);

} // namespace meshboost
