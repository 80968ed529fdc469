#pragma once

#include <cstdint>
#include <vector>

#include "meshboost/core/errors.hpp"

namespace meshboost {

// Dense 8-bit image, row-major, interleaved channels. Row 0 is the top row.
class Image8 {
public:
    Image8() = default;
    Image8(int height, int width, int channels, std::uint8_t fill = 0)
        : height_(height), width_(width), channels_(channels),
          data_(static_cast<std::size_t>(height) * width * channels, fill) {
        if (height < 1 || width < 1 || channels < 1)
            throw ValidationError("Image8: dimensions must be >= 1");
    }

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }

    std::uint8_t& at(int row, int col, int c = 0) {
        return data_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + c];
    }
    std::uint8_t at(int row, int col, int c = 0) const {
        return data_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + c];
    }

    const std::vector<std::uint8_t>& data() const { return data_; }
    std::vector<std::uint8_t>& data() { return data_; }

    bool empty() const { return data_.empty(); }

    bool operator==(const Image8& other) const {
        return height_ == other.height_ && width_ == other.width_ &&
               channels_ == other.channels_ && data_ == other.data_;
    }

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> data_;
};

} // namespace meshboost
