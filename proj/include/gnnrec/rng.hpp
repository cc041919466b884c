#pragma once

#include <cstdint>
#include <random>

#include "gnnrec/types.hpp"

namespace gnnrec {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based child seed: depends only on (master, stream, index), never on
/// the order in which children are requested.
constexpr Seed derive_seed(Seed master, std::uint64_t stream, std::uint64_t index = 0) noexcept {
  return mix64(mix64(master ^ mix64(stream + 0x632be59bd9b4e019ULL)) + index);
}

inline Rng make_rng(Seed seed) { return Rng(mix64(seed)); }

// Named streams so that the features, weights, labels, and init for a trial
// never share random numbers.
namespace stream {
inline constexpr std::uint64_t graph = 1;
inline constexpr std::uint64_t features = 2;
inline constexpr std::uint64_t weights = 3;
inline constexpr std::uint64_t labels = 4;
inline constexpr std::uint64_t partition = 5;
inline constexpr std::uint64_t init = 6;
inline constexpr std::uint64_t decompose = 7;
inline constexpr std::uint64_t trial = 8;
}  // namespace stream

}  // namespace gnnrec
