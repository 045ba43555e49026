#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cra {

inline constexpr const char* kGeneratorId = "mt19937_64/seed_seq(splitmix64(base_seed,stream))";

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic per-stream engine: stream i of a base seed is seeded from
/// an splitmix64-mixed word sequence, so streams are reproducible and
/// statistically independent.
inline std::mt19937_64 make_stream_rng(std::uint64_t base_seed, std::uint64_t stream) {
    std::uint64_t state = base_seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
    std::seed_seq seq{detail::splitmix64(state), detail::splitmix64(state),
                      detail::splitmix64(state), detail::splitmix64(state)};
    return std::mt19937_64(seq);
}

/// Unbiased uniform draw from {0, ..., n-1} (Lemire multiply-shift).
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (lo < threshold) {
            m = static_cast<unsigned __int128>(rng()) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Draws an index from a small categorical distribution by CDF inversion.
inline std::size_t sample_categorical(std::mt19937_64& rng, const std::vector<double>& probs) {
    double u = uniform_unit(rng);
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        if (u < probs[i]) return i;
        u -= probs[i];
    }
    return probs.size() - 1;
}

/// Poisson draw by chunked uniform products; exact for any mean.
inline long long sample_poisson(std::mt19937_64& rng, double mean) {
    long long total = 0;
    while (mean > 0.0) {
        const double chunk = mean > 500.0 ? 500.0 : mean;
        mean -= chunk;
        const double limit = std::exp(-chunk);
        double prod = uniform_unit(rng);
        while (prod >= limit) {
            ++total;
            prod *= uniform_unit(rng);
        }
    }
    return total;
}

}  // namespace cra
