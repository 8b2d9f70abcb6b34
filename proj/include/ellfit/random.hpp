#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ellfit {

/// Engine used everywhere randomness is consumed.
using Rng = std::mt19937_64;

/// Name recorded in reports so a run can be reproduced.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64+splitmix64-substreams";

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent seed for substream `stream` of `seed`.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Substream keyed by an arbitrary path of indices, e.g. (grid, spec, instance, run).
template <typename... Keys>
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t first, Keys... rest) noexcept {
    if constexpr (sizeof...(rest) == 0) {
        return substream_seed(seed, first);
    } else {
        return substream_seed(substream_seed(seed, first), static_cast<std::uint64_t>(rest)...);
    }
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(substream_seed(seed, stream)); }

}  // namespace ellfit
