#pragma once

#include <cstdint>
#include <random>

namespace bpmm {

// Every stochastic operation takes an explicit stream; nothing draws from
// global state.
using RandomStream = std::mt19937_64;

// splitmix64 finalizer, used to derive independent sub-streams from one seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline RandomStream make_stream(std::uint64_t seed, std::uint64_t tag = 0) {
  return RandomStream(mix_seed(seed ^ mix_seed(tag)));
}

}  // namespace bpmm
