#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "n2k/errors.hpp"
#include "n2k/model.hpp"
#include "n2k/tensor.hpp"

namespace n2k {

enum class LossKind { kL2Self, kMaskedL2, kAdss, kAdssTv };

inline const char* loss_kind_name(LossKind k) {
    switch (k) {
        case LossKind::kL2Self: return "l2-self";
        case LossKind::kMaskedL2: return "masked-l2";
        case LossKind::kAdss: return "adss";
        case LossKind::kAdssTv: return "adss-tv";
    }
    return "?";
}

inline LossKind loss_kind_from(const std::string& name) {
    for (const LossKind k :
         {LossKind::kL2Self, LossKind::kMaskedL2, LossKind::kAdss, LossKind::kAdssTv})
        if (name == loss_kind_name(k)) return k;
    throw ConfigError("unknown loss kind '" + name + "'");
}

struct LossSpec {
    LossKind kind = LossKind::kAdss;
    double lambda = 10.0;      // focusing parameter
    double alpha = 1e-4;       // TV weight
    double mask_rate = 0.1;    // fraction of masked pixels per patch
    bool detach_weight = true; // ADSS weight held constant under differentiation

    void validate() const {
        if (lambda < 0.0) throw ConfigError("loss: lambda must be >= 0");
        if (alpha < 0.0) throw ConfigError("loss: alpha must be >= 0");
        if (kind == LossKind::kMaskedL2 && (mask_rate <= 0.0 || mask_rate >= 1.0))
            throw ConfigError("loss: mask_rate must be in (0,1)");
    }
};

struct LossResult {
    double loss = 0.0;
    Tensor grad_pred;
};

// mean((pred-x)^2) with gradient 2*(pred-x)/N.
inline LossResult l2_self_loss(const Tensor& pred, const Tensor& x) {
    require_same_shape(pred, x, "l2_self_loss");
    const double inv_n = 1.0 / double(pred.size());
    LossResult res;
    res.grad_pred = Tensor(pred.shape());
    double acc = 0.0;
    for (std::size_t e = 0; e < pred.size(); ++e) {
        const double r = pred.data()[e] - x.data()[e];
        acc += r * r;
        res.grad_pred.data()[e] = (2.0 * r) * inv_n;
    }
    res.loss = acc * inv_n;
    return res;
}

// Per-pixel weight w = 1/(1 + lambda*|pred-x|); by default w is detached
// (treated as a constant under differentiation), which is what suppresses
// backpropagation from outlier pixels. With lambda = 0 this reproduces
// l2_self_loss bit-for-bit.
inline LossResult adss_loss(const Tensor& pred, const Tensor& x, double lambda,
                            bool detach_weight = true) {
    require_same_shape(pred, x, "adss_loss");
    if (lambda < 0.0) throw ConfigError("adss_loss: lambda must be >= 0");
    const double inv_n = 1.0 / double(pred.size());
    LossResult res;
    res.grad_pred = Tensor(pred.shape());
    double acc = 0.0;
    for (std::size_t e = 0; e < pred.size(); ++e) {
        const double r = pred.data()[e] - x.data()[e];
        const double w = 1.0 / (1.0 + lambda * std::abs(r));
        acc += w * (r * r);
        if (detach_weight) {
            res.grad_pred.data()[e] = (2.0 * w * r) * inv_n;
        } else {
            // d/dr [ r^2 / (1 + lambda*|r|) ] = r*(2 + lambda*|r|) * w^2
            res.grad_pred.data()[e] = r * (2.0 + lambda * std::abs(r)) * w * w * inv_n;
        }
    }
    res.loss = acc * inv_n;
    return res;
}

// Anisotropic total variation of forward differences, mean over all
// horizontal and vertical terms pooled; subgradient 0 at ties.
inline LossResult tv_term(const Tensor& pred, double alpha) {
    if (alpha < 0.0) throw ConfigError("tv_term: alpha must be >= 0");
    const Shape s = pred.shape();
    LossResult res;
    res.grad_pred = Tensor(s);
    const std::size_t n_h = s.height * (s.width - 1);
    const std::size_t n_v = (s.height - 1) * s.width;
    const std::size_t terms = s.batch * s.channels * (n_h + n_v);
    if (terms == 0) return res;
    const double scale = alpha / double(terms);
    double acc = 0.0;
    for (std::size_t b = 0; b < s.batch; ++b) {
        for (std::size_t c = 0; c < s.channels; ++c) {
            const double* plane = pred.plane(b, c);
            double* g = res.grad_pred.plane(b, c);
            for (std::size_t i = 0; i < s.height; ++i) {
                for (std::size_t j = 0; j + 1 < s.width; ++j) {
                    const double d = plane[i * s.width + j + 1] - plane[i * s.width + j];
                    acc += std::abs(d);
                    const double sg = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                    g[i * s.width + j + 1] += scale * sg;
                    g[i * s.width + j] -= scale * sg;
                }
            }
            for (std::size_t i = 0; i + 1 < s.height; ++i) {
                for (std::size_t j = 0; j < s.width; ++j) {
                    const double d = plane[(i + 1) * s.width + j] - plane[i * s.width + j];
                    acc += std::abs(d);
                    const double sg = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                    g[(i + 1) * s.width + j] += scale * sg;
                    g[i * s.width + j] -= scale * sg;
                }
            }
        }
    }
    res.loss = acc * alpha / double(terms);
    return res;
}

// Plain anisotropic TV value (no weight), for diagnostics.
inline double tv_value(const Tensor& pred) {
    const Shape s = pred.shape();
    double acc = 0.0;
    for (std::size_t b = 0; b < s.batch; ++b)
        for (std::size_t c = 0; c < s.channels; ++c) {
            const double* plane = pred.plane(b, c);
            for (std::size_t i = 0; i < s.height; ++i)
                for (std::size_t j = 0; j + 1 < s.width; ++j)
                    acc += std::abs(plane[i * s.width + j + 1] - plane[i * s.width + j]);
            for (std::size_t i = 0; i + 1 < s.height; ++i)
                for (std::size_t j = 0; j < s.width; ++j)
                    acc += std::abs(plane[(i + 1) * s.width + j] - plane[i * s.width + j]);
        }
    return acc;
}

struct MaskedLossResult {
    double loss = 0.0;
    ParamGrads grads;
};

// Masking-scheme baseline: zero the masked pixels, run the network on the
// masked input, and score only the masked positions (sum, not mean). The
// invariant architecture makes this scheme unnecessary; it exists for
// comparison.
inline MaskedLossResult masked_l2_loss(const ModelParams& params, const Tensor& x,
                                       const std::vector<std::pair<int, int>>& mask) {
    if (mask.empty()) throw ConfigError("masked_l2_loss: empty mask");
    const Shape s = x.shape();
    Tensor masked = x;
    for (const auto& [i, j] : mask) {
        if (i < 0 || j < 0 || std::size_t(i) >= s.height || std::size_t(j) >= s.width)
            throw ConfigError("masked_l2_loss: mask pixel out of bounds");
        for (std::size_t b = 0; b < s.batch; ++b) masked.at(b, 0, std::size_t(i), std::size_t(j)) = 0.0;
    }
    const ForwardTrace trace = forward_trace(params, masked);
    const Tensor& pred = trace.output();

    MaskedLossResult res;
    Tensor grad_pred(pred.shape());
    for (const auto& [i, j] : mask) {
        for (std::size_t b = 0; b < s.batch; ++b) {
            const double r = pred.at(b, 0, std::size_t(i), std::size_t(j)) -
                             x.at(b, 0, std::size_t(i), std::size_t(j));
            res.loss += r * r;
            grad_pred.at(b, 0, std::size_t(i), std::size_t(j)) = 2.0 * r;
        }
    }
    res.grads = backward(params, trace, masked, grad_pred);
    return res;
}

}  // namespace n2k
