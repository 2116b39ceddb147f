// Independent schoolbook arithmetic on decimal digit arrays, used as the
// cross-check oracle for the limb-based implementation. Deliberately a
// different representation and algorithm family: most-significant-first
// digit vectors, digit-by-digit carries, and multiplication via repeated
// shift-and-add.
#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace cpt_oracle {

using Digits = std::vector<int>;  // most significant first, no leading zeros

inline Digits from_string(const std::string& s) {
  Digits d;
  for (char c : s) d.push_back(c - '0');
  while (d.size() > 1 && d.front() == 0) d.erase(d.begin());
  return d;
}

inline std::string to_string(const Digits& d) {
  std::string s;
  for (int v : d) s += static_cast<char>('0' + v);
  return s.empty() ? "0" : s;
}

inline Digits add(const Digits& a, const Digits& b) {
  Digits out;
  int carry = 0;
  int ia = static_cast<int>(a.size()) - 1;
  int ib = static_cast<int>(b.size()) - 1;
  while (ia >= 0 || ib >= 0 || carry) {
    int sum = carry;
    if (ia >= 0) sum += a[ia--];
    if (ib >= 0) sum += b[ib--];
    out.push_back(sum % 10);
    carry = sum / 10;
  }
  std::reverse(out.begin(), out.end());
  while (out.size() > 1 && out.front() == 0) out.erase(out.begin());
  return out;
}

// Repeated shift-and-add: for each multiplier digit (least significant
// first), add the shifted multiplicand to the accumulator that many
// times. Slow and simple on purpose.
inline Digits multiply(const Digits& a, const Digits& b) {
  Digits acc{0};
  int shift = 0;
  for (int i = static_cast<int>(b.size()) - 1; i >= 0; --i, ++shift) {
    Digits shifted = a;
    for (int z = 0; z < shift; ++z) shifted.push_back(0);
    for (int rep = 0; rep < b[i]; ++rep) acc = add(acc, shifted);
  }
  return acc;
}

inline std::string add(const std::string& a, const std::string& b) {
  return to_string(add(from_string(a), from_string(b)));
}

inline std::string multiply(const std::string& a, const std::string& b) {
  return to_string(multiply(from_string(a), from_string(b)));
}

}  // namespace cpt_oracle
