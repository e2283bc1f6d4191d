#pragma once

// Counter-based random numbers (Philox4x32-10) and seed derivation.
//
// Every random quantity in the lab is a pure function of (key, counter):
// no generator state is carried between draws, so any site, path or
// replica can be regenerated in isolation and in any order.

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace kpz {

using Counter4 = std::array<std::uint32_t, 4>;
using Key2 = std::array<std::uint32_t, 2>;

namespace detail {

inline void philox_round(Counter4& c, const Key2& k) noexcept {
    constexpr std::uint64_t kM0 = 0xD2511F53u;
    constexpr std::uint64_t kM1 = 0xCD9E8D57u;
    const std::uint64_t p0 = kM0 * c[0];
    const std::uint64_t p1 = kM1 * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace detail

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
inline Counter4 philox4x32(Counter4 ctr, Key2 key) noexcept {
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kW0;
            key[1] += kW1;
        }
        detail::philox_round(ctr, key);
    }
    return ctr;
}

inline Key2 key_from_seed(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Child seed for (domain, index) under `master`. Distinct domains keep
/// e.g. landscape weights and Brownian paths from sharing streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t domain,
                                 std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master ^ splitmix64(domain)) + index);
}

/// Maps a 32-bit word to the open interval (0, 1).
inline double u01_open(std::uint32_t x) noexcept {
    return (static_cast<double>(x) + 0.5) * 0x1p-32;
}

/// Exp(1) variate from one 32-bit word; strictly positive.
inline double exp1_from_bits(std::uint32_t x) noexcept {
    return -std::log(u01_open(x));
}

/// Two independent N(0,1) variates (Box-Muller) from two 32-bit words.
inline std::pair<double, double> normal_pair_from_bits(std::uint32_t a,
                                                       std::uint32_t b) noexcept {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    const double r = std::sqrt(-2.0 * std::log(u01_open(a)));
    const double th = kTwoPi * u01_open(b);
    return {r * std::cos(th), r * std::sin(th)};
}

// Stream tags, placed in counter word 2 so the streams cannot overlap.
inline constexpr std::uint32_t kStreamWeights = 0x57454947u;   // "WEIG"
inline constexpr std::uint32_t kStreamBrownian = 0x42524f57u;  // "BROW"
inline constexpr std::uint32_t kStreamGeneric = 0x47454e52u;   // "GENR"

/// Stateless stream of normals / uniforms indexed by position, keyed by a
/// seed. Draw `i` is the same no matter how many draws precede it.
class IndexedStream {
public:
    IndexedStream(std::uint64_t seed, std::uint32_t tag) noexcept
        : key_(key_from_seed(seed)), tag_(tag) {}

    double normal(std::uint64_t i) const noexcept {
        const auto w = block(i >> 1);
        const auto [a, b] = normal_pair_from_bits(w[0], w[1]);
        return (i & 1u) ? b : a;
    }

    double uniform(std::uint64_t i) const noexcept {
        const auto w = block(i >> 2);
        return u01_open(w[i & 3u]);
    }

    std::uint32_t bits(std::uint64_t i) const noexcept { return block(i >> 2)[i & 3u]; }

private:
    Counter4 block(std::uint64_t b) const noexcept {
        return philox4x32({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                           tag_, 0u},
                          key_);
    }

    Key2 key_;
    std::uint32_t tag_;
};

}  // namespace kpz
