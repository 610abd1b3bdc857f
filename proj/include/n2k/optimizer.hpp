#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "n2k/errors.hpp"
#include "n2k/model.hpp"

namespace n2k {

struct RAdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double base_lr = 3e-2;
    double decay_factor = 0.95;
    std::size_t decay_interval = 1000;
};

// lr(t) = base_lr * decay_factor^(t / interval), real division.
inline double effective_lr(const RAdamConfig& cfg, std::size_t t) {
    return cfg.base_lr * std::pow(cfg.decay_factor, double(t) / double(cfg.decay_interval));
}

struct OptimState {
    RAdamConfig cfg;
    std::size_t step = 0;
    std::vector<Tensor> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;

    static OptimState create(const ModelParams& params, RAdamConfig cfg = {}) {
        OptimState state;
        state.cfg = cfg;
        for (const ConvKernel& k : params.kernels) {
            state.m_w.emplace_back(k.weights.shape());
            state.v_w.emplace_back(k.weights.shape());
            state.m_b.emplace_back(k.bias.size(), 0.0);
            state.v_b.emplace_back(k.bias.size(), 0.0);
        }
        return state;
    }
};

namespace detail {
inline void radam_update(double* param, double* m, double* v, const double* g, std::size_t n,
                         const RAdamConfig& cfg, double rect, double bc1, double bc2,
                         double lr, bool rectified) {
    for (std::size_t e = 0; e < n; ++e) {
        m[e] = cfg.beta1 * m[e] + (1.0 - cfg.beta1) * g[e];
        v[e] = cfg.beta2 * v[e] + (1.0 - cfg.beta2) * g[e] * g[e];
        const double m_hat = m[e] / bc1;
        if (rectified) {
            const double v_hat = std::sqrt(v[e] / bc2);
            param[e] -= lr * rect * m_hat / (v_hat + cfg.eps);
        } else {
            param[e] -= lr * m_hat;
        }
    }
}
}  // namespace detail

// Rectified adaptive-moment step. While the rectification length rho_t stays
// at or below 4 the update falls back to plain bias-corrected momentum.
// Donut masks are reapplied afterwards so the structural invariant survives.
inline void radam_step(OptimState& state, ModelParams& params, const ParamGrads& grads) {
    for (std::size_t k = 0; k < params.kernels.size(); ++k) {
        const auto check = [&](const double* g, std::size_t n) {
            for (std::size_t e = 0; e < n; ++e)
                if (!std::isfinite(g[e])) {
                    const std::size_t layer_idx = params.spec.conv_layer_indices()[k];
                    throw ValidationError("radam_step: non-finite gradient in parameter block '" +
                                          params.spec.layers()[layer_idx].name + "'");
                }
        };
        check(grads.weights[k].data(), grads.weights[k].size());
        check(grads.bias[k].data(), grads.bias[k].size());
    }

    state.step += 1;
    const RAdamConfig& cfg = state.cfg;
    const double t = double(state.step);
    const double b1t = std::pow(cfg.beta1, t);
    const double b2t = std::pow(cfg.beta2, t);
    const double bc1 = 1.0 - b1t;
    const double bc2 = 1.0 - b2t;
    const double rho_inf = 2.0 / (1.0 - cfg.beta2) - 1.0;
    const double rho_t = rho_inf - 2.0 * t * b2t / bc2;
    const bool rectified = rho_t > 4.0;
    double rect = 0.0;
    if (rectified) {
        rect = std::sqrt(((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) /
                         ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
    }
    const double lr = effective_lr(cfg, state.step);

    for (std::size_t k = 0; k < params.kernels.size(); ++k) {
        ConvKernel& kernel = params.kernels[k];
        detail::radam_update(kernel.weights.data(), state.m_w[k].data(), state.v_w[k].data(),
                             grads.weights[k].data(), kernel.weights.size(), cfg, rect, bc1,
                             bc2, lr, rectified);
        detail::radam_update(kernel.bias.data(), state.m_b[k].data(), state.v_b[k].data(),
                             grads.bias[k].data(), kernel.bias.size(), cfg, rect, bc1, bc2, lr,
                             rectified);
        apply_donut_mask_inplace(kernel);
    }
}

}  // namespace n2k
