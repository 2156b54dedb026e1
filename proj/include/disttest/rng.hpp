#pragma once

#include <cstdint>

namespace disttest {

// SplitMix64 step. Used for seed expansion and for deriving independent
// sub-streams; good enough avalanche that consecutive indices give
// uncorrelated seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ behind a std URBG interface, so it plugs into
// std::binomial_distribution and friends. Streams are value types:
// copying one forks the sequence.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  // Seed of independent stream number `index` under a master seed. Exposed
  // separately so a sub-seed can itself become a master for further derivation
  // (per-game seeds that fan out into per-phase streams).
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t sm = master;
    const std::uint64_t base = splitmix64(sm);
    return base ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  }

  // Independent stream number `index` under a master seed. Trials, rows and
  // game replays each get their own stream so reordering or skipping work
  // does not shift anyone else's randomness.
  static RngStream derive(std::uint64_t master, std::uint64_t index) {
    return RngStream(derive_seed(master, index));
  }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace disttest
