#ifndef MMRADAR_RNG_HPP
#define MMRADAR_RNG_HPP

#include <cstdint>
#include <random>

namespace mmradar {

/// Every random draw in the simulator comes from this engine.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stable per-trial seed derived from (master_seed, trial_index).
constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
    return mix64(mix64(master_seed) ^ (trial_index + 0x632BE59BD9B4E019ULL));
}

}  // namespace mmradar

#endif  // MMRADAR_RNG_HPP
