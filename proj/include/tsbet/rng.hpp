#pragma once

#include <cstdint>

namespace tsbet {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Counter-based uniform in (0,1): a pure function of (seed, stream, path, round).
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t path, std::uint64_t round) {
  std::uint64_t key = splitmix64(seed ^ splitmix64(stream));
  key = splitmix64(key ^ path);
  const std::uint64_t bits = splitmix64(key + round * 0xD1B54A32D192ED03ull);
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace tsbet
