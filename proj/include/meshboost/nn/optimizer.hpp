#pragma once

#include <cmath>

#include "meshboost/nn/tensor.hpp"

namespace meshboost::nn {

enum class OptimMethod { Sgd, Adam };

struct OptimConfig {
    OptimMethod method = OptimMethod::Sgd;
    double learning_rate = 1e-2;
    double momentum = 0.0;   // SGD
    double beta1 = 0.9;      // Adam
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Per-parameter optimizer state (momentum / Adam moments), keyed like the
// weights. Deterministic: plain elementwise updates, no randomness.
template <typename T>
struct OptimizerT {
    OptimConfig config;
    NamedTensors<T> m, v;
    std::int64_t step_count = 0;

    explicit OptimizerT(OptimConfig cfg = {}) : config(cfg) {}

    void step(NamedTensors<T>& weights, const NamedTensors<T>& grads) {
        if (weights.size() != grads.size())
            throw ValidationError("optimizer_step: parameter sets differ in size");
        ++step_count;
        for (auto& [name, w] : weights) {
            const auto it = grads.find(name);
            if (it == grads.end()) throw ValidationError("optimizer_step: missing gradient for " + name);
            const TensorT<T>& g = it->second;
            if (g.shape != w.shape)
                throw ShapeError("optimizer_step: " + name + " weight " + shape_str(w.shape) +
                                 " vs gradient " + shape_str(g.shape));
            if (config.method == OptimMethod::Sgd) {
                if (config.momentum != 0.0) {
                    auto& mom = buffer(m, name, w);
                    for (std::size_t i = 0; i < w.data.size(); ++i) {
                        mom.data[i] = static_cast<T>(config.momentum * mom.data[i] + g.data[i]);
                        w.data[i] -= static_cast<T>(config.learning_rate * mom.data[i]);
                    }
                } else {
                    for (std::size_t i = 0; i < w.data.size(); ++i)
                        w.data[i] -= static_cast<T>(config.learning_rate * g.data[i]);
                }
            } else {
                auto& m1 = buffer(m, name, w);
                auto& m2 = buffer(v, name, w);
                const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step_count));
                const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step_count));
                for (std::size_t i = 0; i < w.data.size(); ++i) {
                    const double gi = g.data[i];
                    m1.data[i] = static_cast<T>(config.beta1 * m1.data[i] + (1.0 - config.beta1) * gi);
                    m2.data[i] = static_cast<T>(config.beta2 * m2.data[i] + (1.0 - config.beta2) * gi * gi);
                    const double mhat = m1.data[i] / bc1;
                    const double vhat = m2.data[i] / bc2;
                    w.data[i] -= static_cast<T>(config.learning_rate * mhat /
                                                (std::sqrt(vhat) + config.epsilon));
                }
            }
        }
    }

private:
    TensorT<T>& buffer(NamedTensors<T>& store, const std::string& name, const TensorT<T>& like) {
        auto it = store.find(name);
        if (it == store.end()) it = store.emplace(name, TensorT<T>(like.shape)).first;
        return it->second;
    }
};

using Optimizer = OptimizerT<float>;

} // namespace meshboost::nn
