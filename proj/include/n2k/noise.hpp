#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "n2k/errors.hpp"
#include "n2k/rng.hpp"
#include "n2k/tensor.hpp"

namespace n2k {

// Corruption processes on the [0,1] intensity scale. Sigma parameters are
// quoted on the 8-bit (0..255) scale and divided by 255 internally, so the
// usual sigma in {25, 50} can be used verbatim. No clamping happens here:
// clamping would change the noise law; it belongs to 8-bit export only.
//
// Per-pixel draws are addressed by pixel index, so generation is
// deterministic at any parallelism.

enum class NoiseKind { kAwgn, kSpeckle, kSaltPepper, kFusion };

// Reading of the salt-and-pepper projection:
//   kMixed    — corrupt with probability d, fair coin between 0 and 1
//   kSeparate — salt with probability d, else pepper with probability d
enum class SaltPepperMode { kMixed, kSeparate };

inline const char* noise_kind_name(NoiseKind k) {
    switch (k) {
        case NoiseKind::kAwgn: return "awgn";
        case NoiseKind::kSpeckle: return "speckle";
        case NoiseKind::kSaltPepper: return "salt-pepper";
        case NoiseKind::kFusion: return "fusion";
    }
    return "?";
}

inline NoiseKind noise_kind_from(const std::string& name) {
    for (const NoiseKind k : {NoiseKind::kAwgn, NoiseKind::kSpeckle, NoiseKind::kSaltPepper,
                              NoiseKind::kFusion})
        if (name == noise_kind_name(k)) return k;
    throw ConfigError("unknown noise kind '" + name + "'");
}

struct NoiseSpec {
    NoiseKind kind = NoiseKind::kAwgn;
    double sigma_g = 0.0;   // 0..255 scale
    double sigma_s = 0.0;   // 0..255 scale
    double density = 0.0;   // probability in [0,1]
    std::uint64_t seed = 0;
    SaltPepperMode sp_mode = SaltPepperMode::kMixed;

    void validate() const {
        if (sigma_g < 0.0 || sigma_s < 0.0)
            throw ConfigError("noise: sigma must be >= 0");
        if (density < 0.0 || density > 1.0)
            throw ConfigError("noise: density must be in [0,1], got " + std::to_string(density));
    }
};

// Fusion stages derive their own sub-seeds from the master seed.
inline constexpr std::uint64_t kStageAwgn = 1;
inline constexpr std::uint64_t kStageSpeckle = 2;
inline constexpr std::uint64_t kStageSaltPepper = 3;

// y = x + n, n ~ N(0, (sigma_g/255)^2)
inline Tensor apply_awgn(const Tensor& x, double sigma_g, std::uint64_t seed) {
    if (sigma_g < 0.0) throw ConfigError("awgn: sigma must be >= 0");
    if (sigma_g == 0.0) return x;
    const double scale = sigma_g / 255.0;
    Tensor y = x;
    double* v = y.data();
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double n = normal_from_bits(stream_value(seed, 2 * i), stream_value(seed, 2 * i + 1));
        v[i] += scale * n;
    }
    return y;
}

// y = x + n*x, n uniform on [-sqrt(3)*sigma_s/255, +sqrt(3)*sigma_s/255]
// (the zero-mean uniform law with standard deviation sigma_s/255).
inline Tensor apply_speckle(const Tensor& x, double sigma_s, std::uint64_t seed) {
    if (sigma_s < 0.0) throw ConfigError("speckle: sigma must be >= 0");
    if (sigma_s == 0.0) return x;
    const double half_width = std::sqrt(3.0) * sigma_s / 255.0;
    Tensor y = x;
    double* v = y.data();
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double n = half_width * (2.0 * uniform01(stream_value(seed, i)) - 1.0);
        v[i] += n * v[i];
    }
    return y;
}

inline Tensor apply_salt_pepper(const Tensor& x, double density, std::uint64_t seed,
                                SaltPepperMode mode = SaltPepperMode::kMixed) {
    if (density < 0.0 || density > 1.0)
        throw ConfigError("salt-pepper: density must be in [0,1], got " + std::to_string(density));
    Tensor y = x;
    double* v = y.data();
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double u = uniform01(stream_value(seed, 2 * i));
        if (mode == SaltPepperMode::kMixed) {
            if (u < density) v[i] = (stream_value(seed, 2 * i + 1) & 1) ? 1.0 : 0.0;
        } else {
            if (u < density) v[i] = 1.0;
            else if (uniform01(stream_value(seed, 2 * i + 1)) < density) v[i] = 0.0;
        }
    }
    return y;
}

// Exactly the staged composition: AWGN, then speckle of the AWGN-corrupted
// image, then the salt-and-pepper projection last.
inline Tensor apply_fusion(const Tensor& x, double sigma_g, double sigma_s, double density,
                           std::uint64_t seed, SaltPepperMode mode = SaltPepperMode::kMixed) {
    const Tensor g = apply_awgn(x, sigma_g, derive_seed(seed, kStageAwgn));
    const Tensor s = apply_speckle(g, sigma_s, derive_seed(seed, kStageSpeckle));
    return apply_salt_pepper(s, density, derive_seed(seed, kStageSaltPepper), mode);
}

inline Tensor apply_noise(const NoiseSpec& spec, const Tensor& x) {
    spec.validate();
    switch (spec.kind) {
        case NoiseKind::kAwgn: return apply_awgn(x, spec.sigma_g, spec.seed);
        case NoiseKind::kSpeckle: return apply_speckle(x, spec.sigma_s, spec.seed);
        case NoiseKind::kSaltPepper:
            return apply_salt_pepper(x, spec.density, spec.seed, spec.sp_mode);
        case NoiseKind::kFusion:
            return apply_fusion(x, spec.sigma_g, spec.sigma_s, spec.density, spec.seed,
                                spec.sp_mode);
    }
    throw ConfigError("apply_noise: bad kind");
}

// Sidecar metadata: everything needed to re-create the corruption.
inline std::string noise_spec_to_text(const NoiseSpec& spec) {
    std::ostringstream out;
    out << "n2k-noise v1\n";
    out << "kind " << noise_kind_name(spec.kind) << "\n";
    out << "sigma_g " << spec.sigma_g << "\n";
    out << "sigma_s " << spec.sigma_s << "\n";
    out << "density " << spec.density << "\n";
    out << "seed " << spec.seed << "\n";
    out << "sp_mode " << (spec.sp_mode == SaltPepperMode::kMixed ? "mixed" : "separate") << "\n";
    return out.str();
}

inline NoiseSpec noise_spec_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "n2k-noise v1")
        throw ConfigError("noise spec: bad header");
    NoiseSpec spec;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key, value;
        ls >> key >> value;
        if (key == "kind") spec.kind = noise_kind_from(value);
        else if (key == "sigma_g") spec.sigma_g = std::stod(value);
        else if (key == "sigma_s") spec.sigma_s = std::stod(value);
        else if (key == "density") spec.density = std::stod(value);
        else if (key == "seed") spec.seed = std::stoull(value);
        else if (key == "sp_mode") {
            if (value == "mixed") spec.sp_mode = SaltPepperMode::kMixed;
            else if (value == "separate") spec.sp_mode = SaltPepperMode::kSeparate;
            else throw ConfigError("noise spec: bad sp_mode '" + value + "'");
        } else {
            throw ConfigError("noise spec: unknown key '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

}  // namespace n2k
