#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace gradft {

// Deterministic, portable PRNG based on SplitMix64 (Steele et al., 2014).
// Chosen over std::mt19937_64 + <random> distributions because the standard
// distributions are not bit-stable across library implementations. All
// derived draws (bounded ints, reals, normals) are implemented here so a
// seed fully determines every byte of output on every platform.
//
// Children are derived from the root seed and a label, not from consumed
// state, so `child("sample/2")` yields the same stream no matter how much
// the parent has been used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Rejection sampling over a power-of-two mask, so the
  // result is exactly uniform and independent of 128-bit arithmetic support.
  std::size_t uniform_index(std::size_t n) {
    if (n <= 1) return 0;
    std::uint64_t mask = ~0ULL >> countl_zero_(n - 1);
    for (;;) {
      std::uint64_t v = next_u64() & mask;
      if (v < n) return static_cast<std::size_t>(v);
    }
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi].
  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

  // Standard normal via Box-Muller; the spare value is cached in the state.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform_real();
    } while (u1 <= 0.0);
    u2 = uniform_real();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Independent child generator identified by (root seed, label).
  Rng child(std::string_view label) const {
    std::uint64_t h = fnv1a_(label);
    // one SplitMix64 scramble to decorrelate child seeds from the root
    std::uint64_t z = seed_ ^ (h + 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

 private:
  static int countl_zero_(std::uint64_t v) {
    int n = 0;
    if (v == 0) return 64;
    while (!(v & 0x8000000000000000ULL)) {
      v <<= 1;
      ++n;
    }
    return n;
  }

  static std::uint64_t fnv1a_(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gradft
