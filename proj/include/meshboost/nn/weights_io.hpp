#pragma once

#include <string>

#include "meshboost/nn/tensor.hpp"

namespace meshboost::nn {

// Serialized network weights: an architecture descriptor (JSON text) plus
// named float32 tensors. See docs/weight_format.md for the byte layout.
struct WeightFile {
    std::string descriptor;
    NamedTensors<float> tensors;
};

void save_weights(const std::string& path, const WeightFile& weights);

// Throws ModelError on bad magic, unsupported version or truncation. When
// expected_descriptor is non-empty it must match the stored descriptor
// exactly, otherwise ModelError is thrown.
WeightFile load_weights(const std::string& path, const std::string& expected_descriptor = "");

} // namespace meshboost::nn
