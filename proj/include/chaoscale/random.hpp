#pragma once

#include <cstdint>
#include <random>

namespace chaoscale {

using Engine = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the substream for sample `index` under `master`. Depends only on
/// the pair, so results do not depend on which worker draws which sample.
inline constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index ^ 0xd1b54a32d192ed03ULL));
}

inline Engine make_engine(std::uint64_t master, std::uint64_t index) {
  return Engine(substream_seed(master, index));
}

}  // namespace chaoscale
