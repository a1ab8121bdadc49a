#pragma once

#include <cstdint>
#include <random>

namespace regtune {

// SplitMix64 step, used to derive well-separated substream seeds.
uint64_t splitmix64(uint64_t x);

// Deterministic RNG wrapper. Gaussian variates use an explicit Box-Muller
// transform instead of std::normal_distribution so that streams are
// bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  // Independent substream keyed by (seed, a, b). Used to give every task and
  // every replicate its own stream, so enlarging T or R keeps earlier draws.
  static Rng keyed(uint64_t seed, uint64_t a, uint64_t b = 0);

  uint64_t next_u64();
  double uniform();                    // [0, 1)
  double uniform(double lo, double hi);
  double gaussian();                   // N(0, 1)
  int rademacher();                    // -1 or +1
  uint64_t uniform_index(uint64_t n);  // {0, ..., n-1}

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace regtune
