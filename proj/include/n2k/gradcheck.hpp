#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "n2k/loss.hpp"
#include "n2k/model.hpp"
#include "n2k/network.hpp"
#include "n2k/rng.hpp"

namespace n2k {

// Central finite-difference verification of every differentiable operation
// and of the assembled network. Backs the `gradcheck` CLI subcommand.

struct GradCheckResult {
    std::string name;
    double max_rel_err = 0.0;
    double tol = 0.0;
    int cases = 0;
    bool pass() const { return max_rel_err < tol; }
};

namespace gradcheck_detail {

inline constexpr double kStep = 1e-6;

inline double rel_err(double got, double want, double floor_abs) {
    const double denom = std::max(std::abs(want), floor_abs);
    return std::abs(got - want) / denom;
}

inline double fd(const std::function<double()>& objective, double* slot, double h) {
    const double v0 = *slot;
    *slot = v0 + h;
    const double up = objective();
    *slot = v0 - h;
    const double down = objective();
    *slot = v0;
    return (up - down) / (2.0 * h);
}

inline Tensor random_tensor(Shape s, Rng& rng, double lo, double hi) {
    Tensor t(s);
    for (std::size_t k = 0; k < t.size(); ++k) t.data()[k] = lo + (hi - lo) * rng.next_uniform();
    return t;
}

}  // namespace gradcheck_detail

inline GradCheckResult gradcheck_conv(int cases, std::uint64_t seed) {
    using namespace gradcheck_detail;
    GradCheckResult res{"conv2d", 0.0, 1e-5, cases};
    Rng meta(seed);
    for (int t = 0; t < cases; ++t) {
        const bool donut = meta.next_below(2) != 0;
        const int d = 1 + int(meta.next_below(3));
        const int k = donut && meta.next_below(2) ? 5 : 3;
        Rng rng(derive_seed(seed, 100 + t));
        Tensor input = random_tensor({1, 2, 5, 5}, rng, -1.0, 1.0);
        ConvKernel kernel = ConvKernel::make(2, 2, k, d, donut);
        for (std::size_t e = 0; e < kernel.weights.size(); ++e)
            kernel.weights.data()[e] = rng.next_normal() * 0.5;
        for (auto& b : kernel.bias) b = rng.next_normal() * 0.1;
        apply_donut_mask_inplace(kernel);
        const Tensor grad_out = random_tensor({1, 2, 5, 5}, rng, -1.0, 1.0);
        const auto objective = [&]() {
            const Tensor out = conv2d_forward(input, kernel);
            double s = 0.0;
            for (std::size_t e = 0; e < out.size(); ++e) s += out.data()[e] * grad_out.data()[e];
            return s;
        };
        const ConvGrads grads = conv2d_backward(input, kernel, grad_out);
        const int half = k / 2;
        for (std::size_t e = 0; e < input.size(); e += 5)
            res.max_rel_err = std::max(
                res.max_rel_err,
                rel_err(grads.input.data()[e], fd(objective, &input.data()[e], kStep), 1e-7));
        for (std::size_t e = 0; e < kernel.weights.size(); e += 3) {
            const int p = int((e / k) % k);
            const int q = int(e % k);
            if (donut && p == half && q == half) continue;
            res.max_rel_err = std::max(
                res.max_rel_err,
                rel_err(grads.weights.data()[e], fd(objective, &kernel.weights.data()[e], kStep),
                        1e-7));
        }
        res.max_rel_err = std::max(
            res.max_rel_err, rel_err(grads.bias[0], fd(objective, &kernel.bias[0], kStep), 1e-7));
    }
    return res;
}

inline GradCheckResult gradcheck_activation(int cases, std::uint64_t seed) {
    using namespace gradcheck_detail;
    GradCheckResult res{"activation", 0.0, 1e-5, cases};
    for (int t = 0; t < cases; ++t) {
        Rng rng(derive_seed(seed, 200 + t));
        Tensor input = random_tensor({1, 1, 4, 4}, rng, -1.0, 1.0);
        for (std::size_t e = 0; e < input.size(); ++e)
            if (std::abs(input.data()[e]) < 0.02) input.data()[e] += 0.05;  // stay off the kink
        const Tensor grad_out = random_tensor({1, 1, 4, 4}, rng, -1.0, 1.0);
        const auto objective = [&]() {
            const Tensor out = activation_forward(input, Activation::kLeakyRelu);
            double s = 0.0;
            for (std::size_t e = 0; e < out.size(); ++e) s += out.data()[e] * grad_out.data()[e];
            return s;
        };
        const Tensor grads = activation_backward(input, Activation::kLeakyRelu, grad_out);
        for (std::size_t e = 0; e < input.size(); ++e)
            res.max_rel_err = std::max(
                res.max_rel_err,
                rel_err(grads.data()[e], fd(objective, &input.data()[e], kStep), 1e-7));
    }
    return res;
}

inline GradCheckResult gradcheck_losses(int cases, std::uint64_t seed) {
    using namespace gradcheck_detail;
    GradCheckResult res{"losses", 0.0, 1e-5, cases};
    for (int t = 0; t < cases; ++t) {
        Rng rng(derive_seed(seed, 300 + t));
        Tensor pred = random_tensor({1, 1, 4, 4}, rng, 0.0, 1.0);
        const Tensor x = random_tensor({1, 1, 4, 4}, rng, 0.0, 1.0);
        const double lambda = 10.0 * rng.next_uniform();

        const LossResult l2 = l2_self_loss(pred, x);
        const LossResult adss = adss_loss(pred, x, lambda);
        const LossResult adss_diff = adss_loss(pred, x, lambda, false);
        for (std::size_t e = 0; e < pred.size(); ++e) {
            res.max_rel_err = std::max(
                res.max_rel_err,
                rel_err(l2.grad_pred.data()[e],
                        fd([&] { return l2_self_loss(pred, x).loss; }, &pred.data()[e], kStep),
                        1e-8));
            // full-derivative ADSS mode differentiates through the weight
            res.max_rel_err = std::max(
                res.max_rel_err,
                rel_err(adss_diff.grad_pred.data()[e],
                        fd([&] { return adss_loss(pred, x, lambda, false).loss; },
                           &pred.data()[e], kStep),
                        1e-8));
        }
        (void)adss;
    }
    return res;
}

// Smallest |pre-activation| feeding any activation layer; finite-difference
// probes are only valid away from the leaky-relu kink.
inline double min_preactivation(const ModelParams& params, const Tensor& x) {
    const ForwardTrace trace = forward_trace(params, x);
    double lo = std::numeric_limits<double>::infinity();
    const auto& layers = params.spec.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].kind != LayerKind::kActivation) continue;
        const Tensor& src = trace.node_outputs()[params.spec.index_of(layers[i].inputs[0])];
        for (std::size_t e = 0; e < src.size(); ++e)
            lo = std::min(lo, std::abs(src.data()[e]));
    }
    return lo;
}

inline GradCheckResult gradcheck_network(int cases, std::uint64_t seed) {
    using namespace gradcheck_detail;
    GradCheckResult res{"network", 0.0, 1e-4, cases};
    std::uint64_t salt = 0;
    for (int t = 0; t < cases; ++t) {
        ModelParams params = init_params(build_default_n2k(1, 1), 0);
        Tensor x, loss_grad;
        // resample until every pre-activation is at a safe distance (100x
        // the probe step) from the kink
        for (;; ++salt) {
            Rng rng(derive_seed(seed, 400 + salt));
            params = init_params(build_default_n2k(1, 1), derive_seed(seed, 7000 + salt));
            x = random_tensor({1, 1, 8, 8}, rng, 0.0, 1.0);
            loss_grad = random_tensor({1, 1, 8, 8}, rng, -1.0, 1.0);
            if (min_preactivation(params, x) > 100.0 * kStep) break;
        }
        ++salt;
        const auto objective = [&]() {
            const Tensor out = forward(params, x);
            double s = 0.0;
            for (std::size_t e = 0; e < out.size(); ++e) s += out.data()[e] * loss_grad.data()[e];
            return s;
        };
        const ParamGrads grads = forward_backward(params, x, loss_grad);
        for (std::size_t k = 0; k < params.kernels.size(); ++k) {
            ConvKernel& kernel = params.kernels[k];
            const int half = kernel.size() / 2;
            for (std::size_t e = 0; e < kernel.weights.size(); e += 2) {
                const int p = int((e / kernel.size()) % kernel.size());
                const int q = int(e % kernel.size());
                if (kernel.donut && p == half && q == half) continue;
                res.max_rel_err = std::max(
                    res.max_rel_err,
                    rel_err(grads.weights[k].data()[e],
                            fd(objective, &kernel.weights.data()[e], kStep), 1e-6));
            }
            res.max_rel_err = std::max(
                res.max_rel_err,
                rel_err(grads.bias[k][0], fd(objective, &kernel.bias[0], kStep), 1e-6));
        }
    }
    return res;
}

inline std::vector<GradCheckResult> run_gradient_suite(int cases, std::uint64_t seed) {
    return {
        gradcheck_conv(cases, seed),
        gradcheck_activation(cases, seed),
        gradcheck_losses(cases, seed),
        gradcheck_network(cases, seed),
    };
}

}  // namespace n2k
