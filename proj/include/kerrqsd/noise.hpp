#pragma once

// Counter-based complex Wiener increments. A (seed, counter) pair always maps to the
// same increment, so trajectories replay bit-identically regardless of scheduling.

#include <array>
#include <cstdint>

#include "kerrqsd/hilbert.hpp"

namespace kerrqsd {

/// Philox4x32-10 block: 128-bit counter, 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

struct NoiseStream {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;
};

/// Two independent standard normals for (seed, counter); does not advance.
std::array<double, 2> gaussian_pair(std::uint64_t seed, std::uint64_t counter);

/// (g1 + i g2) sqrt(dt/2): M(dxi) = M(dxi^2) = 0, M(|dxi|^2) = dt. Advances the counter.
Complex wiener_increment(NoiseStream& stream, double dt);

/// Seed of trajectory `index` under `master_seed` (SplitMix64 finalizer on both words).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

}  // namespace kerrqsd
