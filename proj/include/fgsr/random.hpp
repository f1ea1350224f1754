#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace fgsr {

/// All randomness in the library flows through a 64-bit Mersenne Twister
/// (std::mt19937_64) seeded from (seed, stream) via std::seed_seq, so that
/// independent draws for the same experiment seed never share a stream.
using Rng = std::mt19937_64;

enum class Stream : std::uint32_t {
    LowRankLeft = 1,
    LowRankRight = 2,
    Noise = 3,
    Sampling = 4,
    Corruption = 5,
    FactorInit = 6,
    RatingsSplit = 7,
    Verification = 8,
};

inline Rng make_rng(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

inline void fill_standard_normal(Rng& rng, std::span<double> out, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out) v = scale * normal(rng);
}

/// Uniform draw in [0, 1) from the top 53 bits of one engine output.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace fgsr
