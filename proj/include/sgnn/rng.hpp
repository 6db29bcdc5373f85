#pragma once

#include <cstdint>

namespace sgnn {

// splitmix64; used to scramble seeds and derive independent streams.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic generator (xoshiro256**). All sampling in the project goes
// through this class so that results depend only on (inputs, seed), never on
// platform-specific std distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed = 1) {
    uint64_t x = seed;
    for (auto& w : s_) w = (x = splitmix64(x));
  }

  uint64_t u64() {
    uint64_t result = rotl(s_[1] * 5, 7) * 9;
    uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, n). n must be > 0.
  uint64_t index(uint64_t n) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(u64()) * n) >> 64);
  }

  // Uniform in [0, 1) with 53 bits.
  double real() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * real(); }

  bool bernoulli(double p) { return real() < p; }

  // Independent stream for a (seed, id) pair; id order does not matter.
  static Rng stream(uint64_t seed, uint64_t id) {
    return Rng(splitmix64(seed ^ splitmix64(id + 0x2545f4914f6cdd1dULL)));
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
};

}  // namespace sgnn
