#pragma once

#include <cstdint>
#include <random>

namespace ionnode {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for (master seed, stream, index). Streams separate
/// experiment stages; the index is usually the trial number.
inline Rng substream(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t a = splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  const std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x8cb92ba72f3d8dd7ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
  return Rng(seq);
}

}  // namespace ionnode
