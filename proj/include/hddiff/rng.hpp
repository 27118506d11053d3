#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace hddiff {

using Rng = std::mt19937_64;

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of an independent stream identified by (base, tags...).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(base);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  return Rng(derive_seed(base, tags));
}

// Uniformly random permutation of 0..n-1.
std::vector<int> random_permutation(int n, Rng& rng);

// Stream tags.
namespace stream {
inline constexpr std::uint64_t kFolds = 1;
inline constexpr std::uint64_t kSplit = 2;
inline constexpr std::uint64_t kPermutation = 3;
inline constexpr std::uint64_t kSimulation = 4;
inline constexpr std::uint64_t kBacktest = 5;
}  // namespace stream

}  // namespace hddiff
