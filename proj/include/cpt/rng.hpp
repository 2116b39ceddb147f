#pragma once

#include <cstdint>
#include <string>

namespace cpt {

/// splitmix64; small, stable across platforms, good enough for operand
/// and tamper-position sampling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform over [lo, hi). Modulo bias is negligible for our ranges.
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    return lo + next() % (hi - lo);
  }

 private:
  std::uint64_t state_;
};

/// FNV-1a over a byte string; used for stable request keying and seed
/// derivation. Stable across platforms and runs.
inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xCBF29CE484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace cpt
