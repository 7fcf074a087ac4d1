#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace procaudit {

// The library avoids std::shuffle and the std distributions: their output is
// implementation-defined, and reports must be reproducible from a seed alone.
// Everything random goes through the helpers below on a raw mt19937_64 stream.

// Uniform double in [0, 1), 53 usable bits.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit_uniform(rng);
}

// Unbiased uniform integer in [0, bound). bound must be nonzero.
inline std::uint64_t bounded_u64(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

// Fisher-Yates, fixed draw order.
template <typename T>
void shuffle_in_place(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded_u64(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

// splitmix64 finalizer; decorrelates nearby inputs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent per-stream seed, e.g. one stream per cross-validation fold.
// Parallel and serial execution consume identical streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 1));
}

} // namespace procaudit
