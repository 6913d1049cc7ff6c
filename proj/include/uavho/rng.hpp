#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace uavho {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds from a root.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a root and a sequence of counters, e.g.
/// derive_seed(root, {path_id, episode}). Order-sensitive.
constexpr std::uint64_t derive_seed(std::uint64_t root,
                                    std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = mix64(root);
  for (auto k : keys) s = mix64(s ^ mix64(k + 0x632be59bd9b4e019ULL));
  return s;
}

// Stream tags keep the per-purpose substreams of one run apart.
enum class Stream : std::uint64_t {
  Channel = 1,
  Exploration = 2,
  Replay = 3,
  Init = 4,
  Paths = 5,
};

constexpr std::uint64_t stream_seed(std::uint64_t root, Stream s,
                                    std::initializer_list<std::uint64_t> keys = {}) {
  std::uint64_t seed = derive_seed(root, {static_cast<std::uint64_t>(s)});
  for (auto k : keys) seed = derive_seed(seed, {k});
  return seed;
}

}  // namespace uavho
