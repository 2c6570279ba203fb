#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gshap {

/// Generator handle passed explicitly to every stochastic operation.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used only to decorrelate derived stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of a child stream identified by a path of integers below `master`.
/// Derivation depends only on the path, never on scheduling order, so serial
/// and threaded runs draw identical numbers.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (std::uint64_t p : path) s = mix64(s ^ mix64(p + 0x632BE59BD9B4E019ULL));
  return s;
}

inline Rng make_rng(std::uint64_t master,
                    std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(master, path));
}

// Stream tags keep independent consumers of one master seed apart.
namespace stream {
inline constexpr std::uint64_t kInstances = 1;
inline constexpr std::uint64_t kStandardize = 2;
inline constexpr std::uint64_t kContribution = 3;
inline constexpr std::uint64_t kLemmaTrials = 4;
}  // namespace stream

}  // namespace gshap
