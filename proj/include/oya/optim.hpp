#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "oya/nn.hpp"

namespace oya {

struct AdamWConfig {
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <class T>
struct AdamWState {
    long step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    AdamWState() = default;
    explicit AdamWState(const nn::ParamSet<T>& ps) {
        for (const auto& p : ps) {
            m.emplace_back(p.size(), 0.0);
            v.emplace_back(p.size(), 0.0);
        }
    }
};

struct StepOutcome {
    bool applied = true;
    std::string diagnostic;
};

/// One AdamW update with a constant learning rate:
///   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta).
/// A non-finite gradient rejects the whole step and leaves parameters and moments untouched.
template <class T>
StepOutcome optimizer_step(nn::ParamSet<T>& params, const nn::Gradients<T>& grads, AdamWState<T>& state,
                           const AdamWConfig& cfg) {
    if (grads.g.size() != params.size() || state.m.size() != params.size())
        return {false, "parameter, gradient and state collections differ in size"};
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads.g[i].size() != params[i].size() || state.m[i].size() != params[i].size())
            return {false, "shape mismatch at " + params[i].name};
        for (std::size_t j = 0; j < grads.g[i].size(); ++j)
            if (!std::isfinite(static_cast<double>(grads.g[i][j])))
                return {false, "non-finite gradient at " + params[i].name + "[" + std::to_string(j) + "]"};
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& theta = params[i].value;
        auto& m = state.m[i];
        auto& v = state.v[i];
        const auto& g = grads.g[i];
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double gj = g[j];
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
            const double mhat = m[j] / bc1, vhat = v[j] / bc2;
            const double t = theta[j];
            theta[j] = static_cast<T>(t - cfg.learning_rate * (mhat / (std::sqrt(vhat) + cfg.epsilon) + cfg.weight_decay * t));
        }
    }
    return {};
}

}  // namespace oya
