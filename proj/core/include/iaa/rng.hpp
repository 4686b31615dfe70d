#pragma once

#include <cstdint>
#include <random>

namespace iaa {

/// The toolkit's single generator type. Every stochastic routine takes an
/// explicit seed; independent consumers get their own stream.
using Rng = std::mt19937_64;

/// splitmix64 finaliser; spreads nearby seeds across the state space.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Generator for substream `stream` of `seed` (seeded from seed + stream).
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) { return Rng(mix_seed(seed + stream)); }

/// Named substreams for consumers that are not indexed by a counter.
inline Rng make_named_stream(std::uint64_t seed, std::uint64_t tag) {
    return Rng(mix_seed(mix_seed(seed) ^ mix_seed(tag * 0x2545F4914F6CDD1DULL)));
}

}  // namespace iaa
