#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "n2k/errors.hpp"
#include "n2k/model.hpp"
#include "n2k/patches.hpp"
#include "n2k/tensor.hpp"
#include "n2k/text.hpp"

namespace n2k {

inline double mean_squared_error(const Tensor& pred, const Tensor& ref) {
    require_same_shape(pred, ref, "mse");
    double acc = 0.0;
    for (std::size_t e = 0; e < pred.size(); ++e) {
        const double d = pred.data()[e] - ref.data()[e];
        acc += d * d;
    }
    return acc / double(pred.size());
}

// 10*log10(peak^2 / MSE); identical images return the +infinity sentinel.
inline double psnr(const Tensor& pred, const Tensor& ref, double peak = 1.0) {
    const double mse = mean_squared_error(pred, ref);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

// Mean local SSIM over fully-inside 11x11 Gaussian windows (sigma 1.5),
// stabilizers K1=0.01, K2=0.03 at the given peak.
inline double ssim(const Tensor& pred, const Tensor& ref, double peak = 1.0) {
    require_same_shape(pred, ref, "ssim");
    const Shape s = pred.shape();
    constexpr int kWin = 11;
    constexpr double kSigma = 1.5;
    if (s.height < kWin || s.width < kWin)
        throw ConfigError("ssim: image " + s.str() + " smaller than the 11x11 window");

    double window[kWin][kWin];
    double wsum = 0.0;
    for (int p = 0; p < kWin; ++p)
        for (int q = 0; q < kWin; ++q) {
            const double dp = p - kWin / 2, dq = q - kWin / 2;
            window[p][q] = std::exp(-(dp * dp + dq * dq) / (2.0 * kSigma * kSigma));
            wsum += window[p][q];
        }
    for (int p = 0; p < kWin; ++p)
        for (int q = 0; q < kWin; ++q) window[p][q] /= wsum;

    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t b = 0; b < s.batch; ++b)
        for (std::size_t c = 0; c < s.channels; ++c) {
            const double* x = pred.plane(b, c);
            const double* y = ref.plane(b, c);
            for (std::size_t i = 0; i + kWin <= s.height; ++i)
                for (std::size_t j = 0; j + kWin <= s.width; ++j) {
                    double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
                    for (int p = 0; p < kWin; ++p)
                        for (int q = 0; q < kWin; ++q) {
                            const double w = window[p][q];
                            const double xv = x[(i + p) * s.width + (j + q)];
                            const double yv = y[(i + p) * s.width + (j + q)];
                            mx += w * xv;
                            my += w * yv;
                            xx += w * xv * xv;
                            yy += w * yv * yv;
                            xy += w * xv * yv;
                        }
                    const double vx = xx - mx * mx;
                    const double vy = yy - my * my;
                    const double cov = xy - mx * my;
                    total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                             ((mx * mx + my * my + c1) * (vx + vy + c2));
                    ++count;
                }
        }
    return total / double(count);
}

// mean(pred) - mean(ref): the signed diagnostic behind the brightness-shift
// discussion.
inline double brightness_shift(const Tensor& pred, const Tensor& ref) {
    require_same_shape(pred, ref, "brightness_shift");
    double sp = 0.0, sr = 0.0;
    for (std::size_t e = 0; e < pred.size(); ++e) {
        sp += pred.data()[e];
        sr += ref.data()[e];
    }
    return (sp - sr) / double(pred.size());
}

// 8-fold dihedral test-time averaging. The branch outputs are combined with
// a fixed pairwise tree so an identity denoiser returns the input
// bit-for-bit (sums of equal values stay exact under power-of-two scaling).
template <typename Denoiser>
Tensor tta_apply(Denoiser&& denoise, const Tensor& x) {
    std::vector<Tensor> branch(8);
    for (int k = 0; k < 8; ++k) {
        const Tensor transformed = augment_dihedral(x, k);
        branch[k] = augment_dihedral_inverse(denoise(transformed), k);
        require_same_shape(branch[k], x, "tta_apply");
    }
    auto add = [](const Tensor& a, const Tensor& b) {
        Tensor out = a;
        for (std::size_t e = 0; e < out.size(); ++e) out.data()[e] += b.data()[e];
        return out;
    };
    Tensor sum = add(add(add(branch[0], branch[1]), add(branch[2], branch[3])),
                     add(add(branch[4], branch[5]), add(branch[6], branch[7])));
    for (std::size_t e = 0; e < sum.size(); ++e) sum.data()[e] *= 0.125;
    return sum;
}

inline Tensor tta_denoise(const ModelParams& params, const Tensor& x) {
    return tta_apply([&](const Tensor& t) { return forward(params, t); }, x);
}

struct EvalReport {
    double psnr_db = 0.0;
    double ssim_value = 0.0;
    double mean_shift = 0.0;

    std::string to_text() const {
        std::ostringstream out;
        out << "psnr_db " << format_double(psnr_db) << "\n";
        out << "ssim " << format_double(ssim_value) << "\n";
        out << "mean_shift " << format_double(mean_shift) << "\n";
        return out.str();
    }
    std::string csv_row(const std::string& name) const {
        return name + "," + format_double(psnr_db) + "," + format_double(ssim_value) + "," +
               format_double(mean_shift);
    }
};

inline EvalReport evaluate(const Tensor& pred, const Tensor& ref) {
    EvalReport report;
    report.psnr_db = psnr(pred, ref);
    report.ssim_value = ssim(pred, ref);
    report.mean_shift = brightness_shift(pred, ref);
    return report;
}

}  // namespace n2k
