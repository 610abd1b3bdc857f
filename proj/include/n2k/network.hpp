#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "n2k/errors.hpp"

namespace n2k {

enum class LayerKind {
    kDonutConv,
    kDilatedConv,
    kPointwiseConv,
    kActivation,
    kConcat,
    kSkipAdd,
};

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::kDonutConv: return "donut-conv";
        case LayerKind::kDilatedConv: return "dilated-conv";
        case LayerKind::kPointwiseConv: return "pointwise-conv";
        case LayerKind::kActivation: return "activation";
        case LayerKind::kConcat: return "concat";
        case LayerKind::kSkipAdd: return "skip-add";
    }
    return "?";
}

inline bool is_conv_kind(LayerKind k) {
    return k == LayerKind::kDonutConv || k == LayerKind::kDilatedConv ||
           k == LayerKind::kPointwiseConv;
}

struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::kActivation;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    int kernel_size = 0;  // donut-conv: odd K; dilated-conv: 3; pointwise: 1
    int dilation = 1;
    std::vector<std::string> inputs;  // producer names; "image" is the network input
};

struct NetworkMeta {
    std::size_t channel_width = 0;
    std::size_t path_depth = 0;
    int donut_k = 3;
    std::vector<int> path_dilations;
    bool invariant_by_construction = false;
};

inline constexpr const char* kImageInput = "image";
inline constexpr const char* kSpecMagic = "n2k-spec v1";

// Declarative DAG of layers. Nodes must be declared after their inputs, so a
// well-formed spec is acyclic by construction; the validator rejects
// anything else.
class NetworkSpec {
  public:
    NetworkSpec() = default;
    NetworkSpec(std::vector<LayerSpec> layers, std::string output, NetworkMeta meta)
        : layers_(std::move(layers)), output_(std::move(output)), meta_(std::move(meta)) {
        validate();
    }

    const std::vector<LayerSpec>& layers() const { return layers_; }
    const std::string& output() const { return output_; }
    const NetworkMeta& meta() const { return meta_; }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < layers_.size(); ++i)
            if (layers_[i].name == name) return i;
        throw ConfigError("network spec: unknown layer '" + name + "'");
    }

    // Indices of conv layers, in declaration order; this is the parameter
    // block order used by checkpoints.
    std::vector<std::size_t> conv_layer_indices() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < layers_.size(); ++i)
            if (is_conv_kind(layers_[i].kind)) idx.push_back(i);
        return idx;
    }

    void validate() const {
        if (layers_.empty()) throw ConfigError("network spec: no layers");
        std::map<std::string, std::size_t> seen;  // name -> out_channels
        seen[kImageInput] = 1;
        int max_donut_k = 0;
        for (const LayerSpec& layer : layers_) {
            if (layer.name.empty() || layer.name == kImageInput)
                throw ConfigError("network spec: bad layer name '" + layer.name + "'");
            if (seen.count(layer.name))
                throw ConfigError("network spec: duplicate layer '" + layer.name + "'");
            const std::size_t want_inputs =
                (layer.kind == LayerKind::kConcat || layer.kind == LayerKind::kSkipAdd) ? 2 : 1;
            if (layer.inputs.size() != want_inputs)
                throw ConfigError("network spec: layer '" + layer.name + "' needs " +
                                  std::to_string(want_inputs) + " inputs");
            std::size_t in_sum = 0;
            for (const std::string& in : layer.inputs) {
                auto it = seen.find(in);
                if (it == seen.end())
                    throw ConfigError("network spec: layer '" + layer.name + "' input '" + in +
                                      "' is not declared before use (missing or cyclic)");
                in_sum += it->second;
            }
            switch (layer.kind) {
                case LayerKind::kDonutConv:
                    if (layer.kernel_size < 3 || layer.kernel_size % 2 == 0)
                        throw ConfigError("network spec: donut-conv '" + layer.name +
                                          "' needs odd K >= 3");
                    max_donut_k = std::max(max_donut_k, layer.kernel_size);
                    break;
                case LayerKind::kDilatedConv:
                    if (layer.kernel_size != 3)
                        throw ConfigError("network spec: dilated-conv '" + layer.name +
                                          "' kernel must be 3x3");
                    if (layer.dilation < 1)
                        throw ConfigError("network spec: dilated-conv '" + layer.name +
                                          "' needs dilation >= 1");
                    break;
                case LayerKind::kPointwiseConv:
                    if (layer.kernel_size != 1)
                        throw ConfigError("network spec: pointwise-conv '" + layer.name +
                                          "' kernel must be 1x1");
                    break;
                case LayerKind::kActivation:
                    if (layer.in_channels != layer.out_channels)
                        throw ConfigError("network spec: activation '" + layer.name +
                                          "' must preserve channels");
                    break;
                case LayerKind::kConcat:
                    if (layer.out_channels != in_sum)
                        throw ConfigError("network spec: concat '" + layer.name +
                                          "' out channels must equal the input sum");
                    break;
                case LayerKind::kSkipAdd: {
                    const std::size_t a = seen.at(layer.inputs[0]);
                    const std::size_t b = seen.at(layer.inputs[1]);
                    if (a != b || layer.out_channels != a)
                        throw ConfigError("network spec: skip-add '" + layer.name +
                                          "' inputs must have equal channels");
                    break;
                }
            }
            if (layer.kind != LayerKind::kConcat && layer.kind != LayerKind::kSkipAdd) {
                if (layer.in_channels != in_sum)
                    throw ConfigError("network spec: layer '" + layer.name + "' in=" +
                                      std::to_string(layer.in_channels) +
                                      " but its input provides " + std::to_string(in_sum));
            }
            seen[layer.name] = layer.out_channels;
        }
        if (!seen.count(output_) || output_ == kImageInput)
            throw ConfigError("network spec: output '" + output_ + "' is not a layer");
        if (seen.at(output_) != 1)
            throw ConfigError("network spec: output must be single-channel");

        if (meta_.invariant_by_construction) {
            // Build-time guard for the invariance condition d >= ceil(K/2);
            // the analyzer remains the authoritative check.
            const int k = max_donut_k > 0 ? max_donut_k : meta_.donut_k;
            const int need = (k + 1) / 2;
            for (const LayerSpec& layer : layers_) {
                if (layer.kind == LayerKind::kDilatedConv && layer.dilation < need)
                    throw ConfigError("network spec: invariant-by-construction requires d >= " +
                                      std::to_string(need) + " (ceil(K/2) for K=" +
                                      std::to_string(k) + "), but '" + layer.name +
                                      "' has d=" + std::to_string(layer.dilation));
                if (layer.kind != LayerKind::kDonutConv)
                    for (const std::string& in : layer.inputs)
                        if (in == kImageInput)
                            throw ConfigError(
                                "network spec: invariant-by-construction requires the image "
                                "to enter through a donut-conv, but '" +
                                layer.name + "' reads it directly");
            }
        }
    }

  private:
    std::vector<LayerSpec> layers_;
    std::string output_;
    NetworkMeta meta_;
};

// Canonical Noise2Kernel topology: donut front end, two dilated paths,
// channel concat, skip connection from the donut activation (projected by a
// pointwise conv), two-layer pointwise head.
inline NetworkSpec build_n2k(std::size_t channel_width, std::size_t path_depth, int donut_k,
                             int dilation_a, int dilation_b, bool invariant_by_construction) {
    if (channel_width < 1 || path_depth < 1)
        throw ConfigError("build_n2k: channel_width and path_depth must be >= 1");
    const std::size_t w = channel_width;
    std::vector<LayerSpec> layers;
    auto conv = [&](std::string name, LayerKind kind, std::size_t in, std::size_t out, int k,
                    int d, std::string input) {
        layers.push_back({std::move(name), kind, in, out, k, d, {std::move(input)}});
    };
    auto act = [&](std::string name, std::size_t ch, std::string input) {
        layers.push_back({std::move(name), LayerKind::kActivation, ch, ch, 0, 1,
                          {std::move(input)}});
    };

    conv("donut", LayerKind::kDonutConv, 1, w, donut_k, 1, kImageInput);
    act("donut_act", w, "donut");
    std::string tail_a = "donut_act";
    std::string tail_b = "donut_act";
    for (std::size_t k = 1; k <= path_depth; ++k) {
        const std::string ca = "a" + std::to_string(k);
        conv(ca, LayerKind::kDilatedConv, w, w, 3, dilation_a, tail_a);
        act(ca + "_act", w, ca);
        tail_a = ca + "_act";
        const std::string cb = "b" + std::to_string(k);
        conv(cb, LayerKind::kDilatedConv, w, w, 3, dilation_b, tail_b);
        act(cb + "_act", w, cb);
        tail_b = cb + "_act";
    }
    layers.push_back({"merge", LayerKind::kConcat, 2 * w, 2 * w, 0, 1, {tail_a, tail_b}});
    conv("skip_proj", LayerKind::kPointwiseConv, w, 2 * w, 1, 1, "donut_act");
    layers.push_back({"skip", LayerKind::kSkipAdd, 2 * w, 2 * w, 0, 1, {"merge", "skip_proj"}});
    conv("head1", LayerKind::kPointwiseConv, 2 * w, w, 1, 1, "skip");
    act("head1_act", w, "head1");
    conv("head2", LayerKind::kPointwiseConv, w, 1, 1, 1, "head1_act");

    NetworkMeta meta;
    meta.channel_width = w;
    meta.path_depth = path_depth;
    meta.donut_k = donut_k;
    meta.path_dilations = {dilation_a, dilation_b};
    meta.invariant_by_construction = invariant_by_construction;
    return NetworkSpec(std::move(layers), "head2", std::move(meta));
}

inline NetworkSpec build_default_n2k(std::size_t channel_width, std::size_t path_depth) {
    return build_n2k(channel_width, path_depth, 3, 2, 3, true);
}

inline std::string spec_to_text(const NetworkSpec& spec) {
    std::ostringstream out;
    out << kSpecMagic << "\n";
    const NetworkMeta& m = spec.meta();
    out << "meta width " << m.channel_width << "\n";
    out << "meta depth " << m.path_depth << "\n";
    out << "meta donut_k " << m.donut_k << "\n";
    if (!m.path_dilations.empty()) {
        out << "meta dilations ";
        for (std::size_t i = 0; i < m.path_dilations.size(); ++i)
            out << (i ? "," : "") << m.path_dilations[i];
        out << "\n";
    }
    out << "meta invariant_by_construction " << (m.invariant_by_construction ? 1 : 0) << "\n";
    for (const LayerSpec& layer : spec.layers()) {
        out << "node " << layer.name << " kind=" << layer_kind_name(layer.kind);
        if (layer.kind != LayerKind::kConcat && layer.kind != LayerKind::kSkipAdd)
            out << " in=" << layer.in_channels;
        out << " out=" << layer.out_channels;
        if (layer.kind == LayerKind::kDonutConv || layer.kind == LayerKind::kDilatedConv)
            out << " k=" << layer.kernel_size;
        if (layer.kind == LayerKind::kDilatedConv) out << " d=" << layer.dilation;
        out << " inputs=";
        for (std::size_t i = 0; i < layer.inputs.size(); ++i)
            out << (i ? "," : "") << layer.inputs[i];
        out << "\n";
    }
    out << "output " << spec.output() << "\n";
    return out.str();
}

namespace detail {
inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (const char ch : s) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    return parts;
}

inline LayerKind layer_kind_from(const std::string& name) {
    for (const LayerKind k :
         {LayerKind::kDonutConv, LayerKind::kDilatedConv, LayerKind::kPointwiseConv,
          LayerKind::kActivation, LayerKind::kConcat, LayerKind::kSkipAdd})
        if (name == layer_kind_name(k)) return k;
    throw ConfigError("network spec: unknown layer kind '" + name + "'");
}
}  // namespace detail

inline NetworkSpec spec_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    bool magic_ok = false;
    std::vector<LayerSpec> layers;
    std::string output;
    NetworkMeta meta;
    meta.donut_k = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!magic_ok) {
            if (line != kSpecMagic)
                throw ConfigError("network spec: expected '" + std::string(kSpecMagic) +
                                  "' header, got '" + line + "'");
            magic_ok = true;
            continue;
        }
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "meta") {
            std::string key, value;
            ls >> key >> value;
            if (key == "width") meta.channel_width = std::stoul(value);
            else if (key == "depth") meta.path_depth = std::stoul(value);
            else if (key == "donut_k") meta.donut_k = std::stoi(value);
            else if (key == "dilations") {
                for (const std::string& d : detail::split(value, ','))
                    meta.path_dilations.push_back(std::stoi(d));
            } else if (key == "invariant_by_construction") {
                meta.invariant_by_construction = value == "1";
            } else {
                throw ConfigError("network spec: unknown meta key '" + key + "'");
            }
        } else if (word == "node") {
            LayerSpec layer;
            ls >> layer.name;
            std::string attr;
            bool kind_seen = false;
            while (ls >> attr) {
                const auto eq = attr.find('=');
                if (eq == std::string::npos)
                    throw ConfigError("network spec: bad attribute '" + attr + "'");
                const std::string key = attr.substr(0, eq);
                const std::string value = attr.substr(eq + 1);
                if (key == "kind") {
                    layer.kind = detail::layer_kind_from(value);
                    kind_seen = true;
                } else if (key == "in") layer.in_channels = std::stoul(value);
                else if (key == "out") layer.out_channels = std::stoul(value);
                else if (key == "k") layer.kernel_size = std::stoi(value);
                else if (key == "d") layer.dilation = std::stoi(value);
                else if (key == "inputs") layer.inputs = detail::split(value, ',');
                else throw ConfigError("network spec: unknown attribute '" + key + "'");
            }
            if (!kind_seen)
                throw ConfigError("network spec: node '" + layer.name + "' has no kind");
            if (layer.kind == LayerKind::kPointwiseConv && layer.kernel_size == 0)
                layer.kernel_size = 1;
            if (layer.kind == LayerKind::kDilatedConv && layer.kernel_size == 0)
                layer.kernel_size = 3;
            if (layer.kind == LayerKind::kConcat || layer.kind == LayerKind::kSkipAdd) {
                std::size_t sum = 0;
                for (const LayerSpec& prev : layers)
                    for (const std::string& name : layer.inputs)
                        if (prev.name == name) sum += prev.out_channels;
                layer.in_channels = sum;
            }
            layers.push_back(std::move(layer));
        } else if (word == "output") {
            ls >> output;
        } else {
            throw ConfigError("network spec: unknown directive '" + word + "'");
        }
    }
    if (!magic_ok) throw ConfigError("network spec: empty file");
    if (meta.donut_k == 0) meta.donut_k = 3;
    return NetworkSpec(std::move(layers), std::move(output), std::move(meta));
}

}  // namespace n2k
