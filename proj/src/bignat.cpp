#include "cpt/bignat.hpp"

#include <algorithm>
#include <stdexcept>

namespace cpt {

BigNat::BigNat(std::uint64_t v) {
  while (v > 0) {
    limbs_.push_back(static_cast<std::uint32_t>(v % kBase));
    v /= kBase;
  }
}

BigNat BigNat::from_decimal(std::string_view digits) {
  if (digits.empty()) throw std::invalid_argument("empty digit string");
  BigNat out;
  std::size_t i = digits.size();
  while (i > 0) {
    std::size_t chunk = std::min<std::size_t>(9, i);
    std::uint32_t limb = 0;
    for (std::size_t j = i - chunk; j < i; ++j) {
      char c = digits[j];
      if (c < '0' || c > '9') throw std::invalid_argument("non-digit in digit string");
      limb = limb * 10 + static_cast<std::uint32_t>(c - '0');
    }
    out.limbs_.push_back(limb);
    i -= chunk;
  }
  out.trim();
  return out;
}

std::string BigNat::to_decimal() const {
  if (limbs_.empty()) return "0";
  std::string out = std::to_string(limbs_.back());
  for (std::size_t i = limbs_.size() - 1; i-- > 0;) {
    std::string part = std::to_string(limbs_[i]);
    out.append(9 - part.size(), '0');
    out += part;
  }
  return out;
}

std::size_t BigNat::digit_count() const { return to_decimal().size(); }

void BigNat::trim() {
  while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
}

BigNat operator+(const BigNat& a, const BigNat& b) {
  BigNat out;
  const std::size_t n = std::max(a.limbs_.size(), b.limbs_.size());
  out.limbs_.reserve(n + 1);
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t sum = carry;
    if (i < a.limbs_.size()) sum += a.limbs_[i];
    if (i < b.limbs_.size()) sum += b.limbs_[i];
    out.limbs_.push_back(static_cast<std::uint32_t>(sum % BigNat::kBase));
    carry = sum / BigNat::kBase;
  }
  if (carry) out.limbs_.push_back(static_cast<std::uint32_t>(carry));
  return out;
}

BigNat operator-(const BigNat& a, const BigNat& b) {
  if (a < b) throw std::invalid_argument("BigNat subtraction underflow");
  BigNat out;
  out.limbs_.reserve(a.limbs_.size());
  std::int64_t borrow = 0;
  for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
    std::int64_t diff = static_cast<std::int64_t>(a.limbs_[i]) - borrow;
    if (i < b.limbs_.size()) diff -= b.limbs_[i];
    if (diff < 0) {
      diff += BigNat::kBase;
      borrow = 1;
    } else {
      borrow = 0;
    }
    out.limbs_.push_back(static_cast<std::uint32_t>(diff));
  }
  out.trim();
  return out;
}

BigNat operator*(const BigNat& a, const BigNat& b) {
  if (a.limbs_.empty() || b.limbs_.empty()) return BigNat{};
  BigNat out;
  out.limbs_.assign(a.limbs_.size() + b.limbs_.size(), 0);
  for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
    std::uint64_t carry = 0;
    for (std::size_t j = 0; j < b.limbs_.size(); ++j) {
      std::uint64_t cur = out.limbs_[i + j] +
                          static_cast<std::uint64_t>(a.limbs_[i]) * b.limbs_[j] + carry;
      out.limbs_[i + j] = static_cast<std::uint32_t>(cur % BigNat::kBase);
      carry = cur / BigNat::kBase;
    }
    std::size_t k = i + b.limbs_.size();
    while (carry) {
      std::uint64_t cur = out.limbs_[k] + carry;
      out.limbs_[k] = static_cast<std::uint32_t>(cur % BigNat::kBase);
      carry = cur / BigNat::kBase;
      ++k;
    }
  }
  out.trim();
  return out;
}

bool operator<(const BigNat& a, const BigNat& b) {
  if (a.limbs_.size() != b.limbs_.size()) return a.limbs_.size() < b.limbs_.size();
  for (std::size_t i = a.limbs_.size(); i-- > 0;) {
    if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] < b.limbs_[i];
  }
  return false;
}

bool operator<=(const BigNat& a, const BigNat& b) { return !(b < a); }

}  // namespace cpt
