#pragma once

#include <cstdint>

namespace epidcov {

// SplitMix64 finalizer. Bijective on 64-bit words; used both for seed
// expansion and for deriving independent per-task seeds from a master seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Absorb one word into a running seed hash.
inline std::uint64_t seed_absorb(std::uint64_t h, std::uint64_t w) {
  return mix64(h + 0x9e3779b97f4a7c15ULL * (w + 1));
}

/// Derive an independent substream seed from (master, a, b, c).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
  h = seed_absorb(h, a);
  h = seed_absorb(h, b);
  h = seed_absorb(h, c);
  return h;
}

// xoshiro256** by Blackman & Vigna. Period 2^256 - 1. The generator path
// uses only integer ops and one exact float scaling, so streams are
// bit-reproducible across platforms.
class Xoshiro256ss {
public:
  explicit Xoshiro256ss(std::uint64_t seed) {
    std::uint64_t sm = seed + 0x9e3779b97f4a7c15ULL;
    for (auto& word : s_) {
      word = mix64(sm);
      sm += 0x9e3779b97f4a7c15ULL;
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is the fixed point
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), bound >= 1. Rejection sampling, unbiased.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace epidcov
