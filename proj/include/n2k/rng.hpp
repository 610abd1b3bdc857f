#pragma once

#include <cmath>
#include <cstdint>

namespace n2k {

// Counter-based generator built on the splitmix64 finalizer. The bit stream
// is fully specified by the constants below: draw i of the stream with seed s
// is mix64(s + (i+1) * 0x9e3779b97f4a7c15). Integer arithmetic only, so the
// same seed reproduces the same bits on every platform and at any degree of
// parallelism (draws are addressed by index, never by shared state).

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Draw `index` of the stream identified by `seed`.
inline std::uint64_t stream_value(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed + (index + 1) * kGoldenGamma);
}

// Independent sub-stream for (seed, tag); used to split a master seed into
// per-stage, per-image, or per-epoch streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64((seed ^ 0x5851f42d4c957f2dull) + (tag + 1) * kGoldenGamma);
}

// [0,1) from the top 53 bits.
inline double uniform01(std::uint64_t bits) {
    return double(bits >> 11) * 0x1.0p-53;
}

// (0,1]; never zero, safe under log().
inline double uniform01_pos(std::uint64_t bits) {
    return (double(bits >> 11) + 1.0) * 0x1.0p-53;
}

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Standard normal from two uniform draws (Box-Muller, cosine branch).
inline double normal_from_bits(std::uint64_t bits_a, std::uint64_t bits_b) {
    const double u1 = uniform01_pos(bits_a);
    const double u2 = uniform01(bits_b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Sequential convenience stream over the same bit source.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return stream_value(seed_, index_++); }

    double next_uniform() { return uniform01(next_u64()); }

    double next_normal() {
        const std::uint64_t a = next_u64();
        const std::uint64_t b = next_u64();
        return normal_from_bits(a, b);
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = n * (~0ull / n);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

  private:
    std::uint64_t seed_;
    std::uint64_t index_ = 0;
};

}  // namespace n2k
