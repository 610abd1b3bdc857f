#pragma once

#include "n2k/tensor.hpp"

namespace n2k {

// Pointwise maps preserve J-invariance: output (i,j) depends only on
// input (i,j).
enum class Activation { kIdentity, kLeakyRelu };

inline constexpr double kLeakySlope = 0.1;

inline Tensor activation_forward(const Tensor& input, Activation kind) {
    Tensor out = input;
    if (kind == Activation::kLeakyRelu) {
        double* v = out.data();
        for (std::size_t k = 0; k < out.size(); ++k) {
            if (v[k] < 0.0) v[k] *= kLeakySlope;
        }
    }
    return out;
}

// `input` is the forward pass input (pre-activation values).
inline Tensor activation_backward(const Tensor& input, Activation kind,
                                  const Tensor& grad_out) {
    require_same_shape(input, grad_out, "activation_backward");
    Tensor grad_in = grad_out;
    if (kind == Activation::kLeakyRelu) {
        const double* x = input.data();
        double* g = grad_in.data();
        for (std::size_t k = 0; k < grad_in.size(); ++k) {
            if (x[k] < 0.0) g[k] *= kLeakySlope;
        }
    }
    return grad_in;
}

}  // namespace n2k
