#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>

#include "n2k/errors.hpp"
#include "n2k/loss.hpp"
#include "n2k/noise.hpp"
#include "n2k/text.hpp"
#include "n2k/train.hpp"

namespace n2k {

// Flat `key = value` run configuration. Unknown keys are hard errors: a
// silently ignored typo in a noise parameter would corrupt an experiment.
// Every run echoes the fully resolved config (all defaults materialized) so
// the run can be reproduced bit-identically.
struct TrainConfig {
    std::size_t patch_size = 64;
    std::size_t batch_size = 64;
    std::size_t epochs = 30;
    double lr = 3e-2;
    double lambda = 10.0;
    double alpha = 1e-4;
    double mask_rate = 0.1;
    bool detach_weight = true;
    std::string loss = "adss";
    double decay_factor = 0.95;
    std::size_t decay_interval = 1000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t width = 32;
    std::size_t depth = 4;
    std::uint64_t seed = 0;
    std::size_t threads = 0;  // 0 = hardware
    std::string noise_kind = "none";  // none = inputs are already corrupted
    double sigma_g = 0.0;
    double sigma_s = 0.0;
    double density = 0.0;
    std::string sp_mode = "mixed";

    void validate() const {
        if (patch_size < 1 || batch_size < 1)
            throw ConfigError("config: patch_size and batch_size must be positive");
        if (lr <= 0.0) throw ConfigError("config: lr must be positive");
        if (width < 1 || depth < 1)
            throw ConfigError("config: width and depth must be positive");
        (void)loss_kind_from(loss);
        if (noise_kind != "none") (void)noise_kind_from(noise_kind);
        if (sp_mode != "mixed" && sp_mode != "separate")
            throw ConfigError("config: sp_mode must be mixed or separate");
        settings().loss.validate();
        if (noise_kind != "none") noise().validate();
    }

    bool precorrupted() const { return noise_kind == "none"; }

    NoiseSpec noise() const {
        if (precorrupted()) throw ConfigError("config: no noise configured");
        NoiseSpec spec;
        spec.kind = noise_kind_from(noise_kind);
        spec.sigma_g = sigma_g;
        spec.sigma_s = sigma_s;
        spec.density = density;
        spec.seed = seed;
        spec.sp_mode = sp_mode == "mixed" ? SaltPepperMode::kMixed : SaltPepperMode::kSeparate;
        return spec;
    }

    TrainSettings settings() const {
        TrainSettings s;
        s.patch_size = patch_size;
        s.batch_size = batch_size;
        s.epochs = epochs;
        s.seed = seed;
        s.loss.kind = loss_kind_from(loss);
        s.loss.lambda = lambda;
        s.loss.alpha = alpha;
        s.loss.mask_rate = mask_rate;
        s.loss.detach_weight = detach_weight;
        s.optim.base_lr = lr;
        s.optim.decay_factor = decay_factor;
        s.optim.decay_interval = decay_interval;
        s.optim.beta1 = beta1;
        s.optim.beta2 = beta2;
        s.optim.eps = eps;
        return s;
    }
};

inline void apply_config_entry(TrainConfig& cfg, const std::string& key,
                               const std::string& value) {
    if (key == "patch_size") cfg.patch_size = parse_u64(value, key);
    else if (key == "batch_size") cfg.batch_size = parse_u64(value, key);
    else if (key == "epochs") cfg.epochs = parse_u64(value, key);
    else if (key == "lr") cfg.lr = parse_double(value, key);
    else if (key == "lambda") cfg.lambda = parse_double(value, key);
    else if (key == "alpha") cfg.alpha = parse_double(value, key);
    else if (key == "mask_rate") cfg.mask_rate = parse_double(value, key);
    else if (key == "detach_weight") cfg.detach_weight = parse_u64(value, key) != 0;
    else if (key == "loss") cfg.loss = value;
    else if (key == "decay_factor") cfg.decay_factor = parse_double(value, key);
    else if (key == "decay_interval") cfg.decay_interval = parse_u64(value, key);
    else if (key == "beta1") cfg.beta1 = parse_double(value, key);
    else if (key == "beta2") cfg.beta2 = parse_double(value, key);
    else if (key == "eps") cfg.eps = parse_double(value, key);
    else if (key == "width") cfg.width = parse_u64(value, key);
    else if (key == "depth") cfg.depth = parse_u64(value, key);
    else if (key == "seed") cfg.seed = parse_u64(value, key);
    else if (key == "threads") cfg.threads = parse_u64(value, key);
    else if (key == "noise.kind") cfg.noise_kind = value;
    else if (key == "noise.sigma_g") cfg.sigma_g = parse_double(value, key);
    else if (key == "noise.sigma_s") cfg.sigma_s = parse_double(value, key);
    else if (key == "noise.density") cfg.density = parse_double(value, key);
    else if (key == "noise.sp_mode") cfg.sp_mode = value;
    else throw ConfigError("config: unknown key '" + key + "'");
}

inline TrainConfig parse_train_config(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected 'key = value', got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: empty key or value in '" + stripped + "'");
        apply_config_entry(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

inline std::string resolved_config_text(const TrainConfig& cfg) {
    std::ostringstream out;
    out << "patch_size = " << cfg.patch_size << "\n";
    out << "batch_size = " << cfg.batch_size << "\n";
    out << "epochs = " << cfg.epochs << "\n";
    out << "lr = " << format_double(cfg.lr) << "\n";
    out << "lambda = " << format_double(cfg.lambda) << "\n";
    out << "alpha = " << format_double(cfg.alpha) << "\n";
    out << "mask_rate = " << format_double(cfg.mask_rate) << "\n";
    out << "detach_weight = " << (cfg.detach_weight ? 1 : 0) << "\n";
    out << "loss = " << cfg.loss << "\n";
    out << "decay_factor = " << format_double(cfg.decay_factor) << "\n";
    out << "decay_interval = " << cfg.decay_interval << "\n";
    out << "beta1 = " << format_double(cfg.beta1) << "\n";
    out << "beta2 = " << format_double(cfg.beta2) << "\n";
    out << "eps = " << format_double(cfg.eps) << "\n";
    out << "width = " << cfg.width << "\n";
    out << "depth = " << cfg.depth << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "threads = " << cfg.threads << "\n";
    out << "noise.kind = " << cfg.noise_kind << "\n";
    out << "noise.sigma_g = " << format_double(cfg.sigma_g) << "\n";
    out << "noise.sigma_s = " << format_double(cfg.sigma_s) << "\n";
    out << "noise.density = " << format_double(cfg.density) << "\n";
    out << "noise.sp_mode = " << cfg.sp_mode << "\n";
    return out.str();
}

}  // namespace n2k
