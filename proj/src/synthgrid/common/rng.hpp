#pragma once

#include <cstdint>
#include <random>

namespace synthgrid {

// All stochastic routines draw from this engine so results are reproducible
// for a given seed on a given standard library.
using Rng = std::mt19937_64;

// Per-module seed derivation: global seed plus a stable module ordinal.
enum class SeedOrdinal : std::uint64_t {
  kIngest = 0,
  kGmm = 1,
  kGan = 2,
  kVaeGan = 3,
  kGenerate = 4,
  kHems = 5,
};

inline std::uint64_t derive_seed(std::uint64_t global_seed, SeedOrdinal ordinal) {
  return global_seed + static_cast<std::uint64_t>(ordinal);
}

}  // namespace synthgrid
