#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cpt {

/// Non-negative arbitrary-precision integer.
///
/// Limbs are base-1e9 words stored little-endian. Zero is an empty limb
/// vector. All operations are exact; subtraction requires lhs >= rhs.
class BigNat {
 public:
  BigNat() = default;
  explicit BigNat(std::uint64_t v);

  static BigNat from_decimal(std::string_view digits);

  std::string to_decimal() const;
  std::size_t digit_count() const;
  bool is_zero() const { return limbs_.empty(); }

  friend BigNat operator+(const BigNat& a, const BigNat& b);
  friend BigNat operator-(const BigNat& a, const BigNat& b);
  friend BigNat operator*(const BigNat& a, const BigNat& b);

  friend bool operator==(const BigNat& a, const BigNat& b) = default;
  friend bool operator<(const BigNat& a, const BigNat& b);
  friend bool operator<=(const BigNat& a, const BigNat& b);

 private:
  static constexpr std::uint32_t kBase = 1'000'000'000u;
  void trim();

  std::vector<std::uint32_t> limbs_;
};

}  // namespace cpt
