#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "n2k/errors.hpp"
#include "n2k/parallel.hpp"
#include "n2k/tensor.hpp"

namespace n2k {

// Square 2-D convolution kernel. Weights are stored as a rank-4 tensor
// (out_channels, in_channels, K, K). A donut kernel keeps its center weight
// at exactly zero at all times; the convolution routines additionally skip
// the center tap outright, so the center input value is never read.
struct ConvKernel {
    Tensor weights;             // (out, in, K, K)
    std::vector<double> bias;   // out
    int dilation = 1;
    bool donut = false;

    static ConvKernel make(std::size_t out_channels, std::size_t in_channels, int k,
                           int dilation, bool donut) {
        if (k < 1 || k % 2 == 0) {
            throw ConfigError("kernel size must be odd and positive, got " +
                              std::to_string(k));
        }
        if (dilation < 1) {
            throw ConfigError("dilation must be >= 1, got " + std::to_string(dilation));
        }
        ConvKernel kernel;
        kernel.weights = Tensor({out_channels, in_channels, std::size_t(k), std::size_t(k)});
        kernel.bias.assign(out_channels, 0.0);
        kernel.dilation = dilation;
        kernel.donut = donut;
        return kernel;
    }

    int size() const { return int(weights.shape().height); }
    std::size_t out_channels() const { return weights.shape().batch; }
    std::size_t in_channels() const { return weights.shape().channels; }

    double w(std::size_t o, std::size_t c, std::size_t p, std::size_t q) const {
        return weights.at(o, c, p, q);
    }
    double& w(std::size_t o, std::size_t c, std::size_t p, std::size_t q) {
        return weights.at(o, c, p, q);
    }
};

// Sets the center weight of every (out, in) slice to exactly 0.0; all other
// entries are untouched. Idempotent.
inline ConvKernel apply_donut_mask(ConvKernel kernel) {
    if (!kernel.donut) throw ConfigError("apply_donut_mask: kernel is not donut-flagged");
    const std::size_t h = std::size_t(kernel.size() / 2);
    for (std::size_t o = 0; o < kernel.out_channels(); ++o)
        for (std::size_t c = 0; c < kernel.in_channels(); ++c) kernel.w(o, c, h, h) = 0.0;
    return kernel;
}

inline void apply_donut_mask_inplace(ConvKernel& kernel) {
    if (!kernel.donut) return;
    const std::size_t h = std::size_t(kernel.size() / 2);
    for (std::size_t o = 0; o < kernel.out_channels(); ++o)
        for (std::size_t c = 0; c < kernel.in_channels(); ++c) kernel.w(o, c, h, h) = 0.0;
}

// Same-size dilated convolution with zero padding of width d*floor(K/2).
// Out-of-range taps contribute exactly 0 (they are skipped, not read).
// Per-element accumulation order is fixed: channel, kernel row, kernel
// column — results are bit-identical for any worker count.
inline Tensor conv2d_forward(const Tensor& input, const ConvKernel& kernel) {
    const Shape s = input.shape();
    if (s.channels != kernel.in_channels()) {
        throw ConfigError("conv2d_forward: input shape " + s.str() + " does not match kernel (out=" +
                          std::to_string(kernel.out_channels()) + ",in=" +
                          std::to_string(kernel.in_channels()) + ",k=" +
                          std::to_string(kernel.size()) + ")");
    }
    if (s.height < 1 || s.width < 1) {
        throw ConfigError("conv2d_forward: empty spatial dims " + s.str());
    }
    const int K = kernel.size();
    const int half = K / 2;
    const int d = kernel.dilation;
    const int H = int(s.height);
    const int W = int(s.width);
    const std::size_t O = kernel.out_channels();

    Tensor out({s.batch, O, s.height, s.width});
    const std::size_t rows = s.batch * O * s.height;
    parallel_for(rows, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const std::size_t b = r / (O * s.height);
            const std::size_t o = (r / s.height) % O;
            const int i = int(r % s.height);
            double* acc = out.plane(b, o) + std::size_t(i) * s.width;
            std::fill(acc, acc + W, kernel.bias[o]);
            for (std::size_t c = 0; c < s.channels; ++c) {
                const double* in_plane = input.plane(b, c);
                for (int p = 0; p < K; ++p) {
                    const int ii = i + (p - half) * d;
                    if (ii < 0 || ii >= H) continue;
                    const double* in_row = in_plane + std::size_t(ii) * s.width;
                    for (int q = 0; q < K; ++q) {
                        if (kernel.donut && p == half && q == half) continue;
                        const double wgt = kernel.w(o, c, std::size_t(p), std::size_t(q));
                        const int jo = (q - half) * d;
                        const int j0 = std::max(0, -jo);
                        const int j1 = std::min(W, W - jo);
                        for (int j = j0; j < j1; ++j) acc[j] += wgt * in_row[j + jo];
                    }
                }
            }
        }
    });
    return out;
}

struct ConvGrads {
    Tensor input;            // same shape as the forward input
    Tensor weights;          // same shape as kernel.weights
    std::vector<double> bias;
};

// Exact adjoints of conv2d_forward. For donut kernels the center tap is
// skipped in the input gradient and zeroed in the weight gradient, so the
// structural invariant survives optimizer steps.
inline ConvGrads conv2d_backward(const Tensor& input, const ConvKernel& kernel,
                                 const Tensor& grad_out) {
    const Shape s = input.shape();
    const Shape expected{s.batch, kernel.out_channels(), s.height, s.width};
    if (s.channels != kernel.in_channels() || grad_out.shape() != expected) {
        throw ConfigError("conv2d_backward: grad shape " + grad_out.shape().str() +
                          " does not match expected " + expected.str() + " for input " + s.str());
    }
    const int K = kernel.size();
    const int half = K / 2;
    const int d = kernel.dilation;
    const int H = int(s.height);
    const int W = int(s.width);
    const std::size_t O = kernel.out_channels();
    const std::size_t C = s.channels;

    ConvGrads grads;
    grads.input = Tensor(s);
    grads.weights = Tensor(kernel.weights.shape());
    grads.bias.assign(O, 0.0);

    // d/d input: correlation of grad_out with the kernel, offsets negated.
    const std::size_t in_rows = s.batch * C * s.height;
    parallel_for(in_rows, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const std::size_t b = r / (C * s.height);
            const std::size_t c = (r / s.height) % C;
            const int y = int(r % s.height);
            double* acc = grads.input.plane(b, c) + std::size_t(y) * s.width;
            for (std::size_t o = 0; o < O; ++o) {
                const double* g_plane = grad_out.plane(b, o);
                for (int p = 0; p < K; ++p) {
                    const int ii = y - (p - half) * d;
                    if (ii < 0 || ii >= H) continue;
                    const double* g_row = g_plane + std::size_t(ii) * s.width;
                    for (int q = 0; q < K; ++q) {
                        if (kernel.donut && p == half && q == half) continue;
                        const double wgt = kernel.w(o, c, std::size_t(p), std::size_t(q));
                        const int jo = (q - half) * d;
                        const int j0 = std::max(0, jo);
                        const int j1 = std::min(W, W + jo);
                        for (int x = j0; x < j1; ++x) acc[x] += wgt * g_row[x - jo];
                    }
                }
            }
        }
    });

    // d/d weights: per-entry reduction over (batch, row, column) in fixed order.
    const std::size_t w_entries = O * C * std::size_t(K) * std::size_t(K);
    parallel_for(w_entries, [&](std::size_t begin, std::size_t end) {
        for (std::size_t e = begin; e < end; ++e) {
            const std::size_t o = e / (C * K * K);
            const std::size_t c = (e / (K * K)) % C;
            const int p = int((e / K) % K);
            const int q = int(e % K);
            if (kernel.donut && p == half && q == half) continue;  // stays zero
            double acc = 0.0;
            for (std::size_t b = 0; b < s.batch; ++b) {
                const double* g_plane = grad_out.plane(b, o);
                const double* in_plane = input.plane(b, c);
                for (int i = 0; i < H; ++i) {
                    const int ii = i + (p - half) * d;
                    if (ii < 0 || ii >= H) continue;
                    const double* g_row = g_plane + std::size_t(i) * s.width;
                    const double* in_row = in_plane + std::size_t(ii) * s.width;
                    const int jo = (q - half) * d;
                    const int j0 = std::max(0, -jo);
                    const int j1 = std::min(W, W - jo);
                    // four-lane partial sums with a fixed combine; the
                    // summation order is part of the determinism contract
                    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
                    int j = j0;
                    for (; j + 4 <= j1; j += 4) {
                        a0 += g_row[j] * in_row[j + jo];
                        a1 += g_row[j + 1] * in_row[j + 1 + jo];
                        a2 += g_row[j + 2] * in_row[j + 2 + jo];
                        a3 += g_row[j + 3] * in_row[j + 3 + jo];
                    }
                    double tail = 0.0;
                    for (; j < j1; ++j) tail += g_row[j] * in_row[j + jo];
                    acc += ((a0 + a1) + (a2 + a3)) + tail;
                }
            }
            grads.weights.data()[e] = acc;
        }
    });

    for (std::size_t o = 0; o < O; ++o) {
        double acc = 0.0;
        for (std::size_t b = 0; b < s.batch; ++b) {
            const double* g_plane = grad_out.plane(b, o);
            for (std::size_t k = 0; k < s.height * s.width; ++k) acc += g_plane[k];
        }
        grads.bias[o] = acc;
    }
    return grads;
}

}  // namespace n2k
