#pragma once

#include <cmath>
#include <functional>

#include "meshboost/nn/tensor.hpp"

namespace meshboost::nn {

// Central finite differences of a scalar function with respect to one
// tensor, evaluated in the tensor's own precision (instantiate with double
// for the 64-bit oracle).
template <typename T>
TensorT<T> finite_difference(const std::function<double(const TensorT<T>&)>& f, TensorT<T> x,
                             double h = 1e-3) {
    TensorT<T> grad(x.shape);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const T saved = x.data[i];
        x.data[i] = static_cast<T>(saved + h);
        const double fp = f(x);
        x.data[i] = static_cast<T>(saved - h);
        const double fm = f(x);
        x.data[i] = saved;
        grad.data[i] = static_cast<T>((fp - fm) / (2.0 * h));
    }
    return grad;
}

// Max relative error between analytic and numeric gradients, with an
// absolute floor so near-zero entries do not blow up the ratio.
template <typename T>
double max_relative_error(const TensorT<T>& analytic, const TensorT<T>& numeric, double floor = 1e-6) {
    if (analytic.shape != numeric.shape)
        throw ShapeError("max_relative_error: shapes differ: " + shape_str(analytic.shape) + " vs " +
                         shape_str(numeric.shape));
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.data.size(); ++i) {
        const double a = analytic.data[i], n = numeric.data[i];
        const double denom = std::max({std::abs(a), std::abs(n), floor});
        worst = std::max(worst, std::abs(a - n) / denom);
    }
    return worst;
}

} // namespace meshboost::nn
