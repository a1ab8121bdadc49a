#include "regtune/rng.hpp"

#include <cmath>

namespace regtune {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

Rng Rng::keyed(uint64_t seed, uint64_t a, uint64_t b) {
  uint64_t s = splitmix64(seed ^ splitmix64(a ^ splitmix64(b ^ 0x5bf03635ULL)));
  return Rng(s);
}

uint64_t Rng::next_u64() { return eng_(); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u strictly positive so log is finite.
  double u = 0.0;
  do {
    u = uniform();
  } while (u <= 0.0);
  double v = uniform();
  double r = std::sqrt(-2.0 * std::log(u));
  double theta = 2.0 * M_PI * v;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

int Rng::rademacher() { return (next_u64() & 1ULL) ? 1 : -1; }

uint64_t Rng::uniform_index(uint64_t n) {
  // Rejection sampling for an unbiased bounded draw.
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x = 0;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

}  // namespace regtune
