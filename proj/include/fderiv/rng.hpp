#pragma once

// Deterministic random streams. Every stream is an mt19937_64 seeded by
// splitmix64-mixing (seed, purpose tag, index), so independent purposes and
// per-curve or per-chunk substreams never share state.

#include <cstdint>
#include <random>

namespace fderiv {

enum class StreamTag : std::uint64_t {
  process_scores = 0x5c0e5,
  response_noise = 0x9015e,
  small_ball = 0x5ba11,
  test_points = 0x7e57,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ static_cast<std::uint64_t>(tag));
  s = splitmix64(s ^ index);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace fderiv
