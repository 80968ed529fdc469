#pragma once

#include <string>

#include "meshboost/core/image.hpp"

namespace meshboost {

// Reads a PNG into an 8-bit image with the requested channel count
// (1 = grayscale, 3 = RGB). Palette/16-bit/alpha inputs are converted.
Image8 read_png(const std::string& path, int channels);

// Writes an 8-bit image (1 or 3 channels). Deterministic byte output for
// fixed input.
void write_png(const Image8& image, const std::string& path);

} // namespace meshboost
