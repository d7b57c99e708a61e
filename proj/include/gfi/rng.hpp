#pragma once

#include <cstdint>

// Seedable counter-style generator with a documented algorithm, so sampled
// results are reproducible across platforms and independent of any standard-
// library engine. This is splitmix64 (Steele/Lea/Flood finalizer constants).

namespace gfi::rng {

namespace detail {

constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

struct SplitMix64 {
    std::uint64_t state = 0;

    constexpr explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    constexpr std::uint64_t next() { return detail::finalize(state += detail::GOLDEN); }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Per-trial stream seed: avalanche over (master, trial) so neighbouring
// trial indices land in unrelated streams regardless of thread schedule.
constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t trial) {
    return detail::finalize(master + (trial + 1) * detail::GOLDEN);
}

}  // namespace gfi::rng
