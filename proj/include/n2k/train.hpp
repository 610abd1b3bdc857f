#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "n2k/loss.hpp"
#include "n2k/metrics.hpp"
#include "n2k/model.hpp"
#include "n2k/noise.hpp"
#include "n2k/optimizer.hpp"
#include "n2k/parallel.hpp"
#include "n2k/patches.hpp"
#include "n2k/rng.hpp"
#include "n2k/text.hpp"

namespace n2k {

struct TrainSettings {
    std::size_t patch_size = 64;
    std::size_t batch_size = 64;
    std::size_t epochs = 30;
    LossSpec loss;
    RAdamConfig optim;
    std::uint64_t seed = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double loss = 0.0;
    double lr = 0.0;
    std::optional<double> psnr_db;
    std::optional<double> ssim_value;

    std::string to_line() const {
        std::ostringstream out;
        out << "epoch=" << epoch << " loss=" << format_double(loss)
            << " lr=" << format_double(lr);
        if (psnr_db) out << " psnr=" << format_double(*psnr_db);
        if (ssim_value) out << " ssim=" << format_double(*ssim_value);
        return out.str();
    }
};

struct TrainResult {
    std::vector<EpochRecord> log;
};

// Corrupts each clean image with a per-image sub-seed; images carry their
// noise for the whole run (single fixed noisy realization each).
inline std::vector<Tensor> corrupt_dataset(const std::vector<Tensor>& clean,
                                           const NoiseSpec& noise) {
    std::vector<Tensor> noisy;
    noisy.reserve(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) {
        NoiseSpec per_image = noise;
        per_image.seed = derive_seed(noise.seed, i);
        noisy.push_back(apply_noise(per_image, clean[i]));
    }
    return noisy;
}

namespace detail {

inline std::vector<std::pair<int, int>> random_mask(std::size_t patch, double rate,
                                                    std::uint64_t seed) {
    const std::size_t n = patch * patch;
    std::size_t m = std::size_t(std::llround(rate * double(n)));
    m = std::clamp<std::size_t>(m, 1, n - 1);
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = std::uint32_t(i);
    Rng rng(seed);
    for (std::size_t i = 0; i < m; ++i)
        std::swap(idx[i], idx[i + rng.next_below(n - i)]);
    std::vector<std::pair<int, int>> mask;
    mask.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
        mask.push_back({int(idx[i] / patch), int(idx[i] % patch)});
    return mask;
}

struct ItemResult {
    double loss = 0.0;
    ParamGrads grads;
};

inline ItemResult train_item(const ModelParams& params, const Tensor& patch,
                             const LossSpec& loss, std::uint64_t mask_seed) {
    ItemResult item;
    if (loss.kind == LossKind::kMaskedL2) {
        const auto mask =
            random_mask(patch.shape().height, loss.mask_rate, mask_seed);
        MaskedLossResult res = masked_l2_loss(params, patch, mask);
        item.loss = res.loss;
        item.grads = std::move(res.grads);
        return item;
    }
    const ForwardTrace trace = forward_trace(params, patch);
    LossResult res;
    switch (loss.kind) {
        case LossKind::kL2Self:
            res = l2_self_loss(trace.output(), patch);
            break;
        case LossKind::kAdss:
            res = adss_loss(trace.output(), patch, loss.lambda, loss.detach_weight);
            break;
        case LossKind::kAdssTv: {
            res = adss_loss(trace.output(), patch, loss.lambda, loss.detach_weight);
            const LossResult tv = tv_term(trace.output(), loss.alpha);
            res.loss += tv.loss;
            for (std::size_t e = 0; e < res.grad_pred.size(); ++e)
                res.grad_pred.data()[e] += tv.grad_pred.data()[e];
            break;
        }
        default:
            throw ConfigError("train: unhandled loss kind");
    }
    item.loss = res.loss;
    item.grads = backward(params, trace, patch, res.grad_pred);
    return item;
}

}  // namespace detail

// Self-supervised training on noisy images only. Deterministic for a fixed
// seed at any worker count: all randomness is indexed by (seed, epoch,
// image, patch), and per-item gradients are reduced in item order.
inline TrainResult train(ModelParams& params, const std::vector<Tensor>& noisy_images,
                         const TrainSettings& settings, const Tensor* val_noisy = nullptr,
                         const Tensor* val_clean = nullptr) {
    settings.loss.validate();
    if (noisy_images.empty()) throw ConfigError("train: empty dataset");
    if (settings.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");

    OptimState state = OptimState::create(params, settings.optim);
    TrainResult result;
    for (std::size_t epoch = 1; epoch <= settings.epochs; ++epoch) {
        const std::uint64_t epoch_seed = derive_seed(settings.seed, epoch);

        std::vector<Tensor> patches;
        for (std::size_t img = 0; img < noisy_images.size(); ++img) {
            auto extracted = extract_patches(noisy_images[img], settings.patch_size,
                                             settings.patch_size, derive_seed(epoch_seed, img));
            for (auto& p : extracted) patches.push_back(std::move(p));
        }
        {
            Rng aug(derive_seed(epoch_seed, 0xD1CE));
            for (auto& p : patches) p = augment_dihedral(p, int(aug.next_below(8)));
        }
        {
            Rng shuffle(derive_seed(epoch_seed, 0x5F0E));
            for (std::size_t i = patches.size(); i > 1; --i)
                std::swap(patches[i - 1], patches[shuffle.next_below(i)]);
        }

        double epoch_loss = 0.0;
        std::size_t items_seen = 0;
        for (std::size_t start = 0; start < patches.size(); start += settings.batch_size) {
            const std::size_t nb = std::min(settings.batch_size, patches.size() - start);
            std::vector<detail::ItemResult> items(nb);
            parallel_for(nb, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t k = lo; k < hi; ++k)
                    items[k] = detail::train_item(params, patches[start + k], settings.loss,
                                                  derive_seed(epoch_seed, 0xAA00 + start + k));
            });
            ParamGrads total = std::move(items[0].grads);
            for (std::size_t k = 1; k < nb; ++k) total.add(items[k].grads);
            total.scale(1.0 / double(nb));
            radam_step(state, params, total);
            for (const auto& item : items) epoch_loss += item.loss;
            items_seen += nb;
        }

        EpochRecord record;
        record.epoch = epoch;
        record.loss = epoch_loss / double(items_seen);
        record.lr = effective_lr(state.cfg, state.step);
        if (val_noisy && val_clean) {
            const Tensor pred = forward(params, *val_noisy);
            record.psnr_db = psnr(pred, *val_clean);
            record.ssim_value = ssim(pred, *val_clean);
        }
        result.log.push_back(record);
    }
    return result;
}

}  // namespace n2k
