#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "n2k/activation.hpp"
#include "n2k/conv.hpp"
#include "n2k/network.hpp"
#include "n2k/rng.hpp"
#include "n2k/tensor.hpp"
#include "n2k/version.hpp"

namespace n2k {

// Trainable state for one NetworkSpec: one ConvKernel per conv layer, in
// declaration order. Immutable during inference; training is single-writer.
struct ModelParams {
    NetworkSpec spec;
    std::vector<ConvKernel> kernels;
    std::uint64_t init_seed = 0;
    std::string version = kVersion;
};

// He fan-in initialization, zero biases, donut mask applied. Deterministic
// for a fixed (spec, seed).
inline ModelParams init_params(const NetworkSpec& spec, std::uint64_t seed) {
    ModelParams params;
    params.spec = spec;
    params.init_seed = seed;
    Rng rng(seed);
    for (const std::size_t idx : spec.conv_layer_indices()) {
        const LayerSpec& layer = spec.layers()[idx];
        const int k = layer.kernel_size;
        ConvKernel kernel = ConvKernel::make(layer.out_channels, layer.in_channels, k,
                                             layer.dilation, layer.kind == LayerKind::kDonutConv);
        const double fan_in = double(layer.in_channels) * k * k;
        const double stddev = std::sqrt(2.0 / fan_in);
        for (std::size_t e = 0; e < kernel.weights.size(); ++e)
            kernel.weights.data()[e] = stddev * rng.next_normal();
        apply_donut_mask_inplace(kernel);
        params.kernels.push_back(std::move(kernel));
    }
    return params;
}

// Per-layer outputs kept for the backward pass.
class ForwardTrace {
  public:
    ForwardTrace(const NetworkSpec* spec, std::vector<Tensor> outputs)
        : spec_(spec), outputs_(std::move(outputs)) {}

    const Tensor& output() const { return outputs_[spec_->index_of(spec_->output())]; }
    const std::vector<Tensor>& node_outputs() const { return outputs_; }

  private:
    const NetworkSpec* spec_;
    std::vector<Tensor> outputs_;
};

namespace detail {

inline void check_forward_input(const NetworkSpec& spec, const Tensor& x) {
    const Shape s = x.shape();
    if (s.channels != 1)
        throw ConfigError("forward: input must be single-channel, got " + s.str());
    if (s.height < 1 || s.width < 1)
        throw ConfigError("forward: empty input " + s.str());
    const NetworkMeta& m = spec.meta();
    if (m.path_depth > 0 && !m.path_dilations.empty()) {
        int max_d = 1;
        for (const int d : m.path_dilations) max_d = std::max(max_d, d);
        const std::size_t min_dim = 2 * std::size_t(max_d) * m.path_depth;
        if (s.height < min_dim || s.width < min_dim)
            throw ConfigError("forward: input " + s.str() + " smaller than the minimum " +
                              std::to_string(min_dim) + "x" + std::to_string(min_dim) +
                              " for this network");
    }
}

inline Tensor concat_channels(const Tensor& a, const Tensor& b) {
    const Shape sa = a.shape(), sb = b.shape();
    if (sa.batch != sb.batch || sa.height != sb.height || sa.width != sb.width)
        throw ConfigError("concat: incompatible shapes " + sa.str() + " vs " + sb.str());
    Tensor out({sa.batch, sa.channels + sb.channels, sa.height, sa.width});
    for (std::size_t bt = 0; bt < sa.batch; ++bt) {
        for (std::size_t c = 0; c < sa.channels; ++c)
            std::memcpy(out.plane(bt, c), a.plane(bt, c), sa.height * sa.width * sizeof(double));
        for (std::size_t c = 0; c < sb.channels; ++c)
            std::memcpy(out.plane(bt, sa.channels + c), b.plane(bt, c),
                        sa.height * sa.width * sizeof(double));
    }
    return out;
}

}  // namespace detail

inline ForwardTrace forward_trace(const ModelParams& params, const Tensor& x) {
    const NetworkSpec& spec = params.spec;
    detail::check_forward_input(spec, x);
    std::vector<Tensor> outputs(spec.layers().size());
    std::vector<std::size_t> kernel_of(spec.layers().size(), std::size_t(-1));
    {
        std::size_t kidx = 0;
        for (const std::size_t idx : spec.conv_layer_indices()) kernel_of[idx] = kidx++;
    }
    auto resolve = [&](const std::string& name) -> const Tensor& {
        if (name == kImageInput) return x;
        return outputs[spec.index_of(name)];
    };
    for (std::size_t i = 0; i < spec.layers().size(); ++i) {
        const LayerSpec& layer = spec.layers()[i];
        switch (layer.kind) {
            case LayerKind::kDonutConv:
            case LayerKind::kDilatedConv:
            case LayerKind::kPointwiseConv:
                outputs[i] = conv2d_forward(resolve(layer.inputs[0]), params.kernels[kernel_of[i]]);
                break;
            case LayerKind::kActivation:
                outputs[i] = activation_forward(resolve(layer.inputs[0]), Activation::kLeakyRelu);
                break;
            case LayerKind::kConcat:
                outputs[i] = detail::concat_channels(resolve(layer.inputs[0]),
                                                     resolve(layer.inputs[1]));
                break;
            case LayerKind::kSkipAdd: {
                const Tensor& a = resolve(layer.inputs[0]);
                const Tensor& b = resolve(layer.inputs[1]);
                require_same_shape(a, b, "skip-add");
                Tensor sum = a;
                const double* bd = b.data();
                double* sd = sum.data();
                for (std::size_t e = 0; e < sum.size(); ++e) sd[e] += bd[e];
                outputs[i] = std::move(sum);
                break;
            }
        }
    }
    return ForwardTrace(&spec, std::move(outputs));
}

inline Tensor forward(const ModelParams& params, const Tensor& x) {
    return forward_trace(params, x).output();
}

// Gradients aligned with ModelParams::kernels.
struct ParamGrads {
    std::vector<Tensor> weights;
    std::vector<std::vector<double>> bias;

    void scale(double f) {
        for (Tensor& t : weights)
            for (std::size_t e = 0; e < t.size(); ++e) t.data()[e] *= f;
        for (auto& v : bias)
            for (double& b : v) b *= f;
    }
    void add(const ParamGrads& other) {
        for (std::size_t k = 0; k < weights.size(); ++k) {
            for (std::size_t e = 0; e < weights[k].size(); ++e)
                weights[k].data()[e] += other.weights[k].data()[e];
            for (std::size_t o = 0; o < bias[k].size(); ++o) bias[k][o] += other.bias[k][o];
        }
    }
    static ParamGrads zeros_like(const ModelParams& params) {
        ParamGrads g;
        for (const ConvKernel& k : params.kernels) {
            g.weights.emplace_back(k.weights.shape());
            g.bias.emplace_back(k.bias.size(), 0.0);
        }
        return g;
    }
};

// Exact adjoint of forward over the cached trace. Donut centers come back
// zeroed from conv2d_backward, so optimizer steps preserve the invariant.
inline ParamGrads backward(const ModelParams& params, const ForwardTrace& trace,
                           const Tensor& x, const Tensor& loss_grad) {
    const NetworkSpec& spec = params.spec;
    const std::size_t n = spec.layers().size();
    std::vector<std::size_t> kernel_of(n, std::size_t(-1));
    {
        std::size_t kidx = 0;
        for (const std::size_t idx : spec.conv_layer_indices()) kernel_of[idx] = kidx++;
    }
    ParamGrads grads = ParamGrads::zeros_like(params);
    std::vector<Tensor> node_grad(n);

    const std::size_t out_idx = spec.index_of(spec.output());
    require_same_shape(trace.node_outputs()[out_idx], loss_grad, "backward");
    node_grad[out_idx] = loss_grad;

    auto resolve = [&](const std::string& name) -> const Tensor& {
        if (name == kImageInput) return x;
        return trace.node_outputs()[spec.index_of(name)];
    };
    auto accumulate = [&](const std::string& name, const Tensor& g) {
        if (name == kImageInput) return;  // gradient w.r.t. the image is not needed
        Tensor& slot = node_grad[spec.index_of(name)];
        if (slot.empty()) {
            slot = g;
        } else {
            double* sd = slot.data();
            const double* gd = g.data();
            for (std::size_t e = 0; e < slot.size(); ++e) sd[e] += gd[e];
        }
    };

    for (std::size_t ri = n; ri-- > 0;) {
        if (node_grad[ri].empty()) continue;  // node does not reach the output
        const LayerSpec& layer = spec.layers()[ri];
        const Tensor& g = node_grad[ri];
        switch (layer.kind) {
            case LayerKind::kDonutConv:
            case LayerKind::kDilatedConv:
            case LayerKind::kPointwiseConv: {
                const std::size_t kidx = kernel_of[ri];
                ConvGrads cg = conv2d_backward(resolve(layer.inputs[0]),
                                               params.kernels[kidx], g);
                grads.weights[kidx] = std::move(cg.weights);
                grads.bias[kidx] = std::move(cg.bias);
                if (layer.inputs[0] != kImageInput)
                    accumulate(layer.inputs[0], cg.input);
                break;
            }
            case LayerKind::kActivation:
                accumulate(layer.inputs[0],
                           activation_backward(resolve(layer.inputs[0]),
                                               Activation::kLeakyRelu, g));
                break;
            case LayerKind::kConcat: {
                const Tensor& a = resolve(layer.inputs[0]);
                const Shape sg = g.shape();
                const std::size_t ca = a.shape().channels;
                Tensor ga({sg.batch, ca, sg.height, sg.width});
                Tensor gb({sg.batch, sg.channels - ca, sg.height, sg.width});
                for (std::size_t bt = 0; bt < sg.batch; ++bt) {
                    for (std::size_t c = 0; c < ca; ++c)
                        std::memcpy(ga.plane(bt, c), g.plane(bt, c),
                                    sg.height * sg.width * sizeof(double));
                    for (std::size_t c = ca; c < sg.channels; ++c)
                        std::memcpy(gb.plane(bt, c - ca), g.plane(bt, c),
                                    sg.height * sg.width * sizeof(double));
                }
                accumulate(layer.inputs[0], ga);
                accumulate(layer.inputs[1], gb);
                break;
            }
            case LayerKind::kSkipAdd:
                accumulate(layer.inputs[0], g);
                accumulate(layer.inputs[1], g);
                break;
        }
        if (ri != out_idx) node_grad[ri] = Tensor();  // release
    }
    return grads;
}

inline ParamGrads forward_backward(const ModelParams& params, const Tensor& x,
                                   const Tensor& loss_grad) {
    const ForwardTrace trace = forward_trace(params, x);
    return backward(params, trace, x, loss_grad);
}

// --- checkpoint format ------------------------------------------------------
//
// "N2K1" magic, u32 little-endian header length, ASCII header
// ("n2k-checkpoint v1", version, init seed, then the network spec text),
// then per conv layer the weights and bias as little-endian float32 in
// declaration order. Loading re-verifies the donut-center-zero invariant.

inline constexpr char kCheckpointMagic[4] = {'N', '2', 'K', '1'};

namespace detail {
inline void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
    out.push_back(char((v >> 16) & 0xff));
    out.push_back(char((v >> 24) & 0xff));
}
inline void put_f32(std::string& out, float f) {
    put_u32(out, std::bit_cast<std::uint32_t>(f));
}
inline std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
    if (pos + 4 > in.size()) throw ParseError("checkpoint: truncated", pos);
    const auto b = [&](int k) { return std::uint32_t(std::uint8_t(in[pos + k])); };
    const std::uint32_t v = b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
    pos += 4;
    return v;
}
inline float get_f32(const std::string& in, std::size_t& pos) {
    return std::bit_cast<float>(get_u32(in, pos));
}
}  // namespace detail

inline std::string checkpoint_to_bytes(const ModelParams& params) {
    std::string header = "n2k-checkpoint v1\n";
    header += "version " + params.version + "\n";
    header += "seed " + std::to_string(params.init_seed) + "\n";
    header += spec_to_text(params.spec);

    std::string out(kCheckpointMagic, 4);
    detail::put_u32(out, std::uint32_t(header.size()));
    out += header;
    for (const ConvKernel& kernel : params.kernels) {
        for (std::size_t e = 0; e < kernel.weights.size(); ++e)
            detail::put_f32(out, float(kernel.weights.data()[e]));
        for (const double b : kernel.bias) detail::put_f32(out, float(b));
    }
    return out;
}

inline ModelParams checkpoint_from_bytes(const std::string& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
        throw ParseError("checkpoint: bad magic (want N2K1)", 0);
    pos = 4;
    const std::uint32_t header_len = detail::get_u32(bytes, pos);
    if (pos + header_len > bytes.size())
        throw ParseError("checkpoint: header length exceeds file", pos);
    const std::string header = bytes.substr(pos, header_len);
    pos += header_len;

    std::istringstream hs(header);
    std::string line;
    if (!std::getline(hs, line) || line != "n2k-checkpoint v1")
        throw ParseError("checkpoint: bad header line", 8);
    ModelParams params;
    std::string spec_text;
    while (std::getline(hs, line)) {
        if (line.rfind("version ", 0) == 0) {
            params.version = line.substr(8);
        } else if (line.rfind("seed ", 0) == 0) {
            params.init_seed = std::stoull(line.substr(5));
        } else {
            spec_text += line + "\n";
        }
    }
    params.spec = spec_from_text(spec_text);

    for (const std::size_t idx : params.spec.conv_layer_indices()) {
        const LayerSpec& layer = params.spec.layers()[idx];
        ConvKernel kernel = ConvKernel::make(layer.out_channels, layer.in_channels,
                                             layer.kernel_size, layer.dilation,
                                             layer.kind == LayerKind::kDonutConv);
        for (std::size_t e = 0; e < kernel.weights.size(); ++e)
            kernel.weights.data()[e] = double(detail::get_f32(bytes, pos));
        for (double& b : kernel.bias) b = double(detail::get_f32(bytes, pos));
        if (kernel.donut) {
            const std::size_t h = std::size_t(kernel.size() / 2);
            for (std::size_t o = 0; o < kernel.out_channels(); ++o)
                for (std::size_t c = 0; c < kernel.in_channels(); ++c)
                    if (kernel.w(o, c, h, h) != 0.0)
                        throw ValidationError(
                            "checkpoint: donut invariant violated in layer '" + layer.name +
                            "' (center weight is " + std::to_string(kernel.w(o, c, h, h)) + ")");
        }
        params.kernels.push_back(std::move(kernel));
    }
    if (pos != bytes.size()) throw ParseError("checkpoint: trailing bytes", pos);
    return params;
}

inline void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    const std::string bytes = checkpoint_to_bytes(params);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

inline ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read checkpoint: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checkpoint_from_bytes(bytes);
}

}  // namespace n2k
