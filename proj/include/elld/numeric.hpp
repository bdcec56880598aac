#pragma once
#include <cstdint>
#include <string>

namespace elld {

using i128 = __int128;
using u128 = unsigned __int128;

inline std::string to_string(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  u128 u = neg ? (u128)(-(v + 1)) + 1 : (u128)v;
  std::string s;
  while (u > 0) {
    s.push_back(char('0' + (int)(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  return std::string(s.rbegin(), s.rend());
}

// Kahan-compensated accumulator in long double. Library-wide summation
// policy: accumulate within fixed blocks via kahan_sum, then combine block
// results in index order, so totals are independent of thread schedule.
struct kahan_sum {
  long double s = 0.0L, c = 0.0L;
  void add(long double x) {
    long double y = x - c;
    long double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  long double value() const { return s; }
};

}  // namespace elld
