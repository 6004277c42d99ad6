#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace iarma::rng {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives the seed of an independent stream from a path of integers.
///
/// Stream-splitting rule: the seed for path (k0, k1, ..., kj) is obtained by
/// folding s <- mix64(s ^ mix64(k_i + i)) starting from s = 0. Monte Carlo
/// replicate m of cell c under base seed b uses path (b, c, m, purpose), with
/// purpose 0 for gaps and 1 for innovations, so every replicate is
/// reproducible in isolation regardless of execution order.
constexpr std::uint64_t stream_seed(std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = 0;
  std::uint64_t i = 0;
  for (const auto k : path) {
    s = mix64(s ^ mix64(k + i));
    ++i;
  }
  return s;
}

inline constexpr std::uint64_t kGapStream = 0;
inline constexpr std::uint64_t kInnovationStream = 1;

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine{mix64(seed)}; }

}  // namespace iarma::rng
