#pragma once

#include <cstdint>
#include <vector>

#include "n2k/errors.hpp"
#include "n2k/rng.hpp"
#include "n2k/tensor.hpp"

namespace n2k {

// Grid patch extraction with a seeded origin jitter. The grid origin is
// drawn uniformly inside the leftover slack ((H - ps) mod stride), so the
// patch count is independent of the seed:
//   count = (floor((H-ps)/stride)+1) * (floor((W-ps)/stride)+1)
inline std::vector<Tensor> extract_patches(const Tensor& image, std::size_t patch_size,
                                           std::size_t stride, std::uint64_t seed) {
    const Shape s = image.shape();
    if (s.batch != 1 || s.channels != 1)
        throw ConfigError("extract_patches: expected a single-channel image, got " + s.str());
    if (patch_size < 1 || stride < 1)
        throw ConfigError("extract_patches: patch_size and stride must be >= 1");
    if (s.height < patch_size || s.width < patch_size)
        throw ConfigError("extract_patches: image " + s.str() + " smaller than patch " +
                          std::to_string(patch_size));

    const std::size_t qi = (s.height - patch_size) / stride;
    const std::size_t qj = (s.width - patch_size) / stride;
    const std::size_t rem_i = (s.height - patch_size) - qi * stride;
    const std::size_t rem_j = (s.width - patch_size) - qj * stride;
    Rng rng(derive_seed(seed, 0xA11));
    const std::size_t oi = rem_i ? rng.next_below(rem_i + 1) : 0;
    const std::size_t oj = rem_j ? rng.next_below(rem_j + 1) : 0;

    std::vector<Tensor> patches;
    patches.reserve((qi + 1) * (qj + 1));
    for (std::size_t ti = 0; ti <= qi; ++ti) {
        for (std::size_t tj = 0; tj <= qj; ++tj) {
            const std::size_t r0 = oi + ti * stride;
            const std::size_t c0 = oj + tj * stride;
            Tensor patch({1, 1, patch_size, patch_size});
            for (std::size_t i = 0; i < patch_size; ++i)
                for (std::size_t j = 0; j < patch_size; ++j)
                    patch.at(0, 0, i, j) = image.at(0, 0, r0 + i, c0 + j);
            patches.push_back(std::move(patch));
        }
    }
    return patches;
}

// The 8 dihedral transforms: index = rotation (0..3, 90-degree CCW steps)
// plus 4 for a horizontal mirror applied after the rotation. Index 0 is the
// identity; augment_dihedral_inverse is the exact inverse.
inline Tensor rot90ccw(const Tensor& t) {
    const Shape s = t.shape();
    Tensor out({s.batch, s.channels, s.width, s.height});
    for (std::size_t b = 0; b < s.batch; ++b)
        for (std::size_t c = 0; c < s.channels; ++c)
            for (std::size_t i = 0; i < s.width; ++i)
                for (std::size_t j = 0; j < s.height; ++j)
                    out.at(b, c, i, j) = t.at(b, c, j, s.width - 1 - i);
    return out;
}

inline Tensor rot90cw(const Tensor& t) {
    const Shape s = t.shape();
    Tensor out({s.batch, s.channels, s.width, s.height});
    for (std::size_t b = 0; b < s.batch; ++b)
        for (std::size_t c = 0; c < s.channels; ++c)
            for (std::size_t i = 0; i < s.width; ++i)
                for (std::size_t j = 0; j < s.height; ++j)
                    out.at(b, c, i, j) = t.at(b, c, s.height - 1 - j, i);
    return out;
}

inline Tensor mirror_h(const Tensor& t) {
    const Shape s = t.shape();
    Tensor out(s);
    for (std::size_t b = 0; b < s.batch; ++b)
        for (std::size_t c = 0; c < s.channels; ++c)
            for (std::size_t i = 0; i < s.height; ++i)
                for (std::size_t j = 0; j < s.width; ++j)
                    out.at(b, c, i, j) = t.at(b, c, i, s.width - 1 - j);
    return out;
}

inline Tensor augment_dihedral(const Tensor& patch, int index) {
    if (index < 0 || index > 7)
        throw ConfigError("augment_dihedral: index must be in 0..7, got " +
                          std::to_string(index));
    Tensor out = patch;
    for (int r = 0; r < (index & 3); ++r) out = rot90ccw(out);
    if (index >= 4) out = mirror_h(out);
    return out;
}

inline Tensor augment_dihedral_inverse(const Tensor& patch, int index) {
    if (index < 0 || index > 7)
        throw ConfigError("augment_dihedral_inverse: index must be in 0..7, got " +
                          std::to_string(index));
    Tensor out = patch;
    if (index >= 4) out = mirror_h(out);
    for (int r = 0; r < (index & 3); ++r) out = rot90cw(out);
    return out;
}

}  // namespace n2k
