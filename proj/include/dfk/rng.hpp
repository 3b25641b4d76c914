#pragma once

// Seed derivation used everywhere randomness appears.  Each logical noise
// channel gets its own engine seeded by mixing a base seed with a fixed
// channel tag, so adding or reordering channels never disturbs the draws of
// the others, and a run is reproducible from the base seed alone.

#include <cstdint>
#include <random>

namespace dfk {

// splitmix64 finalizer; decorrelates nearby seeds.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_engine(std::uint64_t base, std::uint64_t tag) {
  return std::mt19937_64(mix_seed(base, tag));
}

}  // namespace dfk
