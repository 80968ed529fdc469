#include "meshboost/texture/masks.hpp"

namespace meshboost {

MaskPair derive_masks(const TextureAtlas& atlas, const Image8& background_mask, int threshold_black) {
    atlas.validate();
    if (background_mask.width() != atlas.width() || background_mask.height() != atlas.height() ||
        background_mask.channels() != 1)
        throw ValidationError("derive_masks: background mask does not match the atlas");

    MaskPair out;
    out.background = background_mask;
    out.missing = Image8(atlas.height(), atlas.width(), 1, 255);
    for (int i = 0; i < atlas.height(); ++i)
        for (int j = 0; j < atlas.width(); ++j) {
            if (background_mask.at(i, j) == 0) continue; // background keeps M=255
            const bool black = atlas.image.at(i, j, 0) <= threshold_black &&
                               atlas.image.at(i, j, 1) <= threshold_black &&
                               atlas.image.at(i, j, 2) <= threshold_black;
            if (black) out.missing.at(i, j) = 0;
        }
    return out;
}

Image8 apply_masks_to_image(const TextureAtlas& atlas, const MaskPair& masks) {
    masks.validate();
    if (masks.missing.width() != atlas.width() || masks.missing.height() != atlas.height())
        throw ValidationError("apply_masks_to_image: masks do not match the atlas");
    Image8 out(atlas.height(), atlas.width(), 3);
    for (int i = 0; i < atlas.height(); ++i)
        for (int j = 0; j < atlas.width(); ++j) {
            if (masks.background.at(i, j) == 0) {
                for (int c = 0; c < 3; ++c) out.at(i, j, c) = 128;
            } else if (masks.missing.at(i, j) == 0) {
                for (int c = 0; c < 3; ++c) out.at(i, j, c) = 255;
            } else {
                for (int c = 0; c < 3; ++c) out.at(i, j, c) = atlas.image.at(i, j, c);
            }
        }
    return out;
}

} // namespace meshboost
