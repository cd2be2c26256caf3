#pragma once

// Seed derivation for per-item random streams. Every random draw in the
// library flows from one run seed through derive_seed; there is no global
// RNG state.

#include <cstdint>

namespace splicelab {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from (base seed, item index, lane).
/// The indices go through splitmix64 so that nearby inputs do not produce
/// correlated streams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t item,
                                    std::uint64_t lane = 0) {
  return splitmix64(base ^ splitmix64(item ^ splitmix64(lane)));
}

}  // namespace splicelab
