#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cpt {

/// Exact rational with 64-bit numerator/denominator, always normalized
/// (den > 0, gcd(|num|, den) == 1). The values handled here are small
/// compromising rates and their means, so no overflow guarding beyond
/// normalization is needed.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational{a.num * b.den + b.num * a.den, a.den * b.den};
  }
  friend Rational operator/(const Rational& a, std::int64_t k) {
    return Rational{a.num, a.den * k};
  }
  friend bool operator==(const Rational& a, const Rational& b) = default;

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  /// Decimal rendering with round-half-up to two places, e.g. "0.83".
  std::string to_fixed2() const {
    std::int64_t n = num;
    bool neg = n < 0;
    if (neg) n = -n;
    std::int64_t scaled = (n * 200 + den) / (2 * den);
    std::string frac = std::to_string(scaled % 100);
    if (frac.size() < 2) frac.insert(0, 2 - frac.size(), '0');
    return (neg ? "-" : "") + std::to_string(scaled / 100) + "." + frac;
  }
};

}  // namespace cpt
