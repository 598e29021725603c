#pragma once

// Seeded random streams. The variate transforms are spelled out so that
// outputs do not depend on the standard library's distribution internals.

#include <cmath>
#include <cstdint>
#include <random>

namespace hitfield {

using Rng = std::mt19937_64;

/// Uniform on the open interval (0, 1).
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) {
  return -std::log(uniform01(rng)) / rate;
}

/// Seed of an independent stream, e.g. one per Monte Carlo replication.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hitfield
