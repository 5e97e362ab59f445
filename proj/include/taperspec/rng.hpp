#pragma once

#include <cstdint>
#include <random>

namespace taperspec {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate user seeds before they key an engine.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream key for replication `index` of an experiment seeded with `master`.
/// Depends only on (master, index), so any worker may compute any replication.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Engine make_engine(std::uint64_t seed) { return Engine(splitmix64(seed)); }

}  // namespace taperspec
