#pragma once

#include <bit>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "n2k/model.hpp"
#include "n2k/network.hpp"
#include "n2k/rng.hpp"
#include "n2k/tensor.hpp"

namespace n2k {

// Finite set of (di, dj) offsets: "output pixel (i,j) depends on input pixel
// (i+di, j+dj)". Modeled on an infinite canvas; zero padding cannot carry
// dependency, so border pixels only ever see a subset of these offsets.
class ReceptiveFieldSet {
  public:
    using Offset = std::pair<int, int>;

    static ReceptiveFieldSet point() {
        ReceptiveFieldSet rf;
        rf.offsets_.insert({0, 0});
        return rf;
    }

    bool contains(int di, int dj) const { return offsets_.count({di, dj}) > 0; }
    std::size_t size() const { return offsets_.size(); }
    bool empty() const { return offsets_.empty(); }
    void insert(int di, int dj) { offsets_.insert({di, dj}); }

    const std::set<Offset>& offsets() const { return offsets_; }

    ReceptiveFieldSet united(const ReceptiveFieldSet& other) const {
        ReceptiveFieldSet out = *this;
        out.offsets_.insert(other.offsets_.begin(), other.offsets_.end());
        return out;
    }

    // Minkowski sum with a layer footprint.
    ReceptiveFieldSet shifted_by(const std::vector<Offset>& footprint) const {
        ReceptiveFieldSet out;
        for (const Offset& o : offsets_)
            for (const Offset& f : footprint)
                out.offsets_.insert({o.first + f.first, o.second + f.second});
        return out;
    }

    bool operator==(const ReceptiveFieldSet&) const = default;

  private:
    std::set<Offset> offsets_;
};

// Footprints: the offsets a single layer application reads.
inline std::vector<ReceptiveFieldSet::Offset> donut_footprint(int k) {
    if (k < 3 || k % 2 == 0)
        throw ConfigError("donut footprint: K must be odd and >= 3, got " + std::to_string(k));
    const int half = k / 2;
    std::vector<ReceptiveFieldSet::Offset> fp;
    for (int di = -half; di <= half; ++di)
        for (int dj = -half; dj <= half; ++dj)
            if (di != 0 || dj != 0) fp.push_back({di, dj});
    return fp;
}

inline std::vector<ReceptiveFieldSet::Offset> dilated3_footprint(int d) {
    std::vector<ReceptiveFieldSet::Offset> fp;
    for (const int di : {-d, 0, d})
        for (const int dj : {-d, 0, d}) fp.push_back({di, dj});
    return fp;
}

// {-floor(K/2)..floor(K/2)}^2 minus the origin: where the donut layer sends
// one pixel's information.
inline ReceptiveFieldSet rf_seed_donut(int k) {
    return ReceptiveFieldSet::point().shifted_by(donut_footprint(k));
}

// One 3x3 d-dilated layer: Minkowski sum with {-d,0,d}^2.
inline ReceptiveFieldSet rf_propagate_dilated(const ReceptiveFieldSet& rf, int d) {
    return rf.shifted_by(dilated3_footprint(d));
}

inline ReceptiveFieldSet rf_propagate_pointwise(const ReceptiveFieldSet& rf) { return rf; }
inline ReceptiveFieldSet rf_propagate_activation(const ReceptiveFieldSet& rf) { return rf; }

inline ReceptiveFieldSet rf_merge_concat(const ReceptiveFieldSet& a,
                                         const ReceptiveFieldSet& b) {
    return a.united(b);
}
inline ReceptiveFieldSet rf_merge_add(const ReceptiveFieldSet& a, const ReceptiveFieldSet& b) {
    return a.united(b);
}

inline std::vector<ReceptiveFieldSet::Offset> layer_footprint(const LayerSpec& layer) {
    switch (layer.kind) {
        case LayerKind::kDonutConv: return donut_footprint(layer.kernel_size);
        case LayerKind::kDilatedConv: return dilated3_footprint(layer.dilation);
        case LayerKind::kPointwiseConv: return {{0, 0}};
        default: return {{0, 0}};
    }
}

// Partition of the pixel grid; the default is one cell per pixel, matching
// the per-pixel invariance the default network asserts.
struct PixelPartition {
    std::vector<std::vector<std::pair<int, int>>> cells;

    static PixelPartition singletons(int height, int width) {
        PixelPartition p;
        p.cells.reserve(std::size_t(height) * width);
        for (int i = 0; i < height; ++i)
            for (int j = 0; j < width; ++j) p.cells.push_back({{i, j}});
        return p;
    }

    void validate(int height, int width) const {
        std::set<std::pair<int, int>> seen;
        for (const auto& cell : cells)
            for (const auto& px : cell) {
                if (px.first < 0 || px.first >= height || px.second < 0 || px.second >= width)
                    throw ConfigError("pixel partition: cell pixel out of bounds");
                if (!seen.insert(px).second)
                    throw ConfigError("pixel partition: cells are not disjoint");
            }
        if (seen.size() != std::size_t(height) * std::size_t(width))
            throw ConfigError("pixel partition: cells do not cover the grid");
    }
};

struct WitnessStep {
    std::string layer;
    int di = 0;
    int dj = 0;
};

struct DependencyReport {
    bool invariant = false;
    std::vector<WitnessStep> witness;  // present iff !invariant; input-to-output order
    std::vector<std::pair<std::string, std::size_t>> rf_sizes;

    std::string to_text() const {
        std::ostringstream out;
        out << "invariant: " << (invariant ? "true" : "false") << "\n";
        out << "partition: singleton-per-pixel\n";
        out << "layers:\n";
        for (const auto& [name, size] : rf_sizes)
            out << "  " << name << " rf=" << size << "\n";
        if (!invariant) {
            out << "witness:\n";
            for (const WitnessStep& step : witness)
                out << "  " << step.layer << " (" << (step.di >= 0 ? "+" : "") << step.di
                    << "," << (step.dj >= 0 ? "+" : "") << step.dj << ")\n";
        }
        return out.str();
    }
};

// Propagates exact offset sets through the DAG and decides J-invariance:
// invariant iff (0,0) is absent from the output's receptive field. When it
// is present, reconstructs one offset chain from the image to the output.
inline DependencyReport check_invariance_static(const NetworkSpec& spec) {
    spec.validate();
    const auto& layers = spec.layers();
    std::vector<ReceptiveFieldSet> rf(layers.size());
    auto rf_of = [&](const std::string& name) -> ReceptiveFieldSet {
        if (name == kImageInput) return ReceptiveFieldSet::point();
        return rf[spec.index_of(name)];
    };

    DependencyReport report;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& layer = layers[i];
        switch (layer.kind) {
            case LayerKind::kDonutConv:
            case LayerKind::kDilatedConv:
            case LayerKind::kPointwiseConv:
                rf[i] = rf_of(layer.inputs[0]).shifted_by(layer_footprint(layer));
                break;
            case LayerKind::kActivation:
                rf[i] = rf_propagate_activation(rf_of(layer.inputs[0]));
                break;
            case LayerKind::kConcat:
                rf[i] = rf_merge_concat(rf_of(layer.inputs[0]), rf_of(layer.inputs[1]));
                break;
            case LayerKind::kSkipAdd:
                rf[i] = rf_merge_add(rf_of(layer.inputs[0]), rf_of(layer.inputs[1]));
                break;
        }
        report.rf_sizes.push_back({layer.name, rf[i].size()});
    }

    const std::size_t out_idx = spec.index_of(spec.output());
    report.invariant = !rf[out_idx].contains(0, 0);
    if (report.invariant) return report;

    // Backtrack one chain: walk from the output toward the image, at each
    // layer picking a footprint offset that keeps the residual target inside
    // the producer's receptive field.
    std::vector<WitnessStep> chain;
    std::string node = spec.output();
    int ti = 0, tj = 0;
    while (node != kImageInput) {
        const LayerSpec& layer = layers[spec.index_of(node)];
        if (layer.kind == LayerKind::kConcat || layer.kind == LayerKind::kSkipAdd) {
            const std::string branch =
                rf_of(layer.inputs[0]).contains(ti, tj) ? layer.inputs[0] : layer.inputs[1];
            chain.push_back({layer.name + "<-" + branch, 0, 0});
            node = branch;
            continue;
        }
        if (layer.kind == LayerKind::kActivation) {
            node = layer.inputs[0];
            continue;
        }
        bool found = false;
        for (const auto& [fi, fj] : layer_footprint(layer)) {
            const int ri = ti - fi, rj = tj - fj;
            const bool ok = layer.inputs[0] == kImageInput ? (ri == 0 && rj == 0)
                                                           : rf_of(layer.inputs[0]).contains(ri, rj);
            if (ok) {
                chain.push_back({layer.name, fi, fj});
                ti = ri;
                tj = rj;
                node = layer.inputs[0];
                found = true;
                break;
            }
        }
        if (!found)
            throw ValidationError("witness reconstruction failed at layer '" + layer.name + "'");
    }
    report.witness.assign(chain.rbegin(), chain.rend());
    return report;
}

// Replaces x[pixel] with `trials` random finite values and reports whether
// the forward output at that pixel stays bit-identical throughout.
inline bool check_invariance_empirical(const ModelParams& params, const Tensor& x, int pi,
                                       int pj, int trials, std::uint64_t seed = 1234) {
    const Shape s = x.shape();
    if (pi < 0 || pj < 0 || std::size_t(pi) >= s.height || std::size_t(pj) >= s.width)
        throw ConfigError("check_invariance_empirical: pixel out of bounds");
    const Tensor base = forward(params, x);
    Rng rng(seed);
    Tensor poked = x;
    for (int t = 0; t < trials; ++t) {
        poked.at(0, 0, std::size_t(pi), std::size_t(pj)) = 8.0 * rng.next_uniform() - 4.0;
        const Tensor out = forward(params, poked);
        for (std::size_t c = 0; c < base.shape().channels; ++c) {
            const double a = base.at(0, c, std::size_t(pi), std::size_t(pj));
            const double b = out.at(0, c, std::size_t(pi), std::size_t(pj));
            if (std::bit_cast<std::uint64_t>(a) != std::bit_cast<std::uint64_t>(b)) return false;
        }
    }
    return true;
}

// Cell-level variant: all pixels of the cell are replaced together and the
// outputs at every cell pixel must stay bit-identical.
inline bool check_invariance_empirical(const ModelParams& params, const Tensor& x,
                                       const std::vector<std::pair<int, int>>& cell, int trials,
                                       std::uint64_t seed = 1234) {
    const Tensor base = forward(params, x);
    Rng rng(seed);
    Tensor poked = x;
    for (int t = 0; t < trials; ++t) {
        for (const auto& [pi, pj] : cell)
            poked.at(0, 0, std::size_t(pi), std::size_t(pj)) = 8.0 * rng.next_uniform() - 4.0;
        const Tensor out = forward(params, poked);
        for (const auto& [pi, pj] : cell)
            for (std::size_t c = 0; c < base.shape().channels; ++c) {
                const double a = base.at(0, c, std::size_t(pi), std::size_t(pj));
                const double b = out.at(0, c, std::size_t(pi), std::size_t(pj));
                if (std::bit_cast<std::uint64_t>(a) != std::bit_cast<std::uint64_t>(b))
                    return false;
            }
    }
    return true;
}

struct SweepRow {
    int k = 0;
    int d = 0;
    int depth = 0;
    bool predicate = false;    // d >= ceil(K/2), the sufficient condition
    bool enumeration = false;  // brute-force: (0,0) absent from the RF
};

// Compares the analytic predicate against exhaustive offset enumeration for
// a donut front end followed by `depth` d-dilated layers. The predicate is
// sufficient, not necessary: rows may be enumeration-invariant with the
// predicate false, but never the other way around.
inline std::vector<SweepRow> dilation_condition_sweep(const std::vector<int>& ks,
                                                      const std::vector<int>& ds,
                                                      int max_depth) {
    std::vector<SweepRow> rows;
    for (const int k : ks) {
        for (const int d : ds) {
            ReceptiveFieldSet rf = rf_seed_donut(k);
            const bool predicate = d >= (k + 1) / 2;
            for (int n = 1; n <= max_depth; ++n) {
                rf = rf_propagate_dilated(rf, d);
                rows.push_back({k, d, n, predicate, !rf.contains(0, 0)});
            }
        }
    }
    return rows;
}

inline std::string sweep_to_text(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "K d n predicate enumeration\n";
    std::size_t disagreements = 0;
    for (const SweepRow& r : rows) {
        out << r.k << " " << r.d << " " << r.depth << " " << (r.predicate ? "true" : "false")
            << " " << (r.enumeration ? "invariant" : "dependent") << "\n";
        if (r.predicate && !r.enumeration) ++disagreements;
    }
    out << "sufficiency disagreements: " << disagreements << "\n";
    return out.str();
}

}  // namespace n2k
