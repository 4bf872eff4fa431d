#pragma once

// Counter-based random numbers: every draw is a pure function of
// (master seed, run index, stage index, draw index).  Sampling the same
// experiment with the same seed therefore gives bitwise-identical results
// no matter how runs are split across workers.

#include <cstdint>

namespace pwl {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// One 64-bit word for the given counter tuple.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t run,
                                  std::uint64_t stage, std::uint64_t draw) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (run * 0xd1342543de82ef95ull));
  h = splitmix64(h ^ (stage * 0xaf251af3b0f025b5ull));
  h = splitmix64(h ^ (draw * 0x9e3779b97f4a7c15ull));
  return h;
}

// Uniform double in [0, 1), 53 significant bits.
inline double counter_uniform(std::uint64_t seed, std::uint64_t run,
                              std::uint64_t stage, std::uint64_t draw) {
  return static_cast<double>(counter_hash(seed, run, stage, draw) >> 11) *
         0x1.0p-53;
}

}  // namespace pwl
