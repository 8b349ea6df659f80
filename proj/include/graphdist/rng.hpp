#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace graphdist {

// mt19937_64 is fully specified by the standard, so draws are bit-identical
// across platforms as long as we avoid the implementation-defined
// std::*_distribution adaptors. The helpers below replace those.
using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline Engine make_engine(std::uint64_t seed) {
    std::uint64_t state = seed;
    std::array<std::uint32_t, 8> words{};
    for (std::size_t i = 0; i < words.size(); i += 2) {
        const std::uint64_t x = splitmix64(state);
        words[i] = static_cast<std::uint32_t>(x);
        words[i + 1] = static_cast<std::uint32_t>(x >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return Engine(seq);
}

// Seed of the independent child stream `index` of `master`. The mapping is
// fixed, so work split across any number of threads sees the same streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master;
    const std::uint64_t a = splitmix64(state);
    state = a ^ (index * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull);
    return splitmix64(state);
}

inline Engine stream_engine(std::uint64_t master, std::uint64_t index) {
    return make_engine(derive_seed(master, index));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Engine& rng, double p) {
    return uniform01(rng) < p;
}

// Uniform integer in [0, bound), unbiased by rejection.
inline std::uint64_t uniform_below(Engine& rng, std::uint64_t bound) {
    const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    for (;;) {
        const std::uint64_t x = rng();
        if (x >= limit) {
            return x % bound;
        }
    }
}

template <class T>
void shuffle(std::span<T> values, Engine& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        using std::swap;
        swap(values[i - 1], values[j]);
    }
}

} // namespace graphdist
