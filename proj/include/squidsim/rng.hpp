// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace squidsim {

// splitmix64 finalizer (Steele, Lea, Flood 2014). Fixed integer semantics on
// any conforming platform.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Per-realization seed: mix of master seed and 1-based realization index.
// Order-independent, so realizations can be generated on any worker.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t realization_index) {
    return splitmix64_mix(master_seed + (realization_index + 1) * 0x9E3779B97F4A7C15ull);
}

// MT19937-64 is fully specified by the C++ standard, so streams are
// reproducible across platforms. Distributions are not; uniform doubles are
// produced from the raw 64-bit stream instead.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace squidsim
