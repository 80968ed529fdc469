#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "meshboost/core/errors.hpp"

namespace meshboost::nn {

// Dense row-major tensor. Production code instantiates float (storage is
// 32-bit); tests also instantiate double to drive finite-difference oracles.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;
    explicit TensorT(std::vector<int> s, T fill = T(0)) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(numel_of(shape)), fill);
    }

    static std::int64_t numel_of(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) {
            if (d < 0) throw ShapeError("negative tensor dimension");
            n *= d;
        }
        return n;
    }

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }
    bool empty() const { return data.empty(); }

    T& operator[](std::size_t i) { return data[i]; }
    T operator[](std::size_t i) const { return data[i]; }

    T& at2(int i, int j) { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
    T at2(int i, int j) const { return data[static_cast<std::size_t>(i) * shape[1] + j]; }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

using Tensor = TensorT<float>;

template <typename T>
using NamedTensors = std::map<std::string, TensorT<T>>;

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

template <typename T>
void require_shape(const TensorT<T>& t, const std::vector<int>& expected, const char* what) {
    if (t.shape != expected)
        throw ShapeError(std::string(what) + ": expected shape " + shape_str(expected) + ", got " +
                         shape_str(t.shape));
}

template <typename T>
void require_ndim(const TensorT<T>& t, int ndim, const char* what) {
    if (t.ndim() != ndim)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(ndim) +
                         "-d tensor, got shape " + shape_str(t.shape));
}

} // namespace meshboost::nn
