#pragma once
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"
#include "rational.hpp"

namespace elld {

// segment size in numbers; 2^20 keeps the odd-only bitmap cache-resident
constexpr std::uint64_t kSieveBlock = 1ull << 20;

// simple odd-only sieve for base primes (root of the segmented limit)
inline std::vector<std::uint32_t> small_primes(std::uint32_t limit) {
  std::vector<std::uint32_t> ps;
  if (limit < 2) return ps;
  ps.push_back(2);
  std::vector<bool> comp(((std::uint64_t)limit >> 1) + 1, false);
  for (std::uint64_t n = 3; n <= limit; n += 2) {
    if (!comp[n >> 1]) {
      ps.push_back((std::uint32_t)n);
      for (std::uint64_t m = n * n; m <= limit; m += 2 * n) comp[m >> 1] = true;
    }
  }
  return ps;
}

// streams all primes <= limit in ascending order (segmented)
template <class F>
inline void for_primes(std::uint64_t limit, F&& fn) {
  if (limit < 2) throw domain_error("for_primes: limit must be >= 2");
  std::uint64_t root = (std::uint64_t)std::sqrt((double)limit);
  while ((root + 1) * (root + 1) <= limit) ++root;
  while (root * root > limit) --root;
  auto base = small_primes((std::uint32_t)root);
  fn((std::uint64_t)2);
  std::vector<bool> seg;
  for (std::uint64_t lo = 3; lo <= limit; lo += kSieveBlock) {
    std::uint64_t hi = lo + kSieveBlock - 1;
    if (hi > limit) hi = limit;
    if ((hi & 1) == 0) --hi;  // odd-only segment; lo stays odd (block size even)
    std::size_t n = (std::size_t)((hi - lo) / 2 + 1);
    seg.assign(n, false);
    for (std::uint32_t p : base) {
      if (p == 2) continue;
      std::uint64_t pp = (std::uint64_t)p * p;
      if (pp > hi) break;
      std::uint64_t start = pp > lo ? pp : ((lo + p - 1) / p) * (std::uint64_t)p;
      if ((start & 1) == 0) start += p;
      for (std::uint64_t m = start; m <= hi; m += 2ull * p)
        seg[(std::size_t)((m - lo) >> 1)] = true;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!seg[i]) fn(lo + 2 * i);
  }
}

struct PrimeSieve {
  std::uint64_t limit;
  std::vector<std::uint64_t> primes;  // ascending, all primes <= limit
};

inline PrimeSieve sieve(std::uint64_t limit) {
  if (limit < 2) throw domain_error("sieve: limit must be >= 2");
  PrimeSieve s{limit, {}};
  double ll = std::log((double)limit);
  if (limit >= 17) s.primes.reserve((std::size_t)(limit / (ll - 1.1)) + 16);
  for_primes(limit, [&](std::uint64_t p) { s.primes.push_back(p); });
  return s;
}

// Jacobi symbol (n|m), m odd positive; binary algorithm
inline int jacobi(long long n, long long m) {
  if (m <= 0 || m % 2 == 0) throw domain_error("jacobi: modulus must be odd positive");
  long long a = n % m;
  if (a < 0) a += m;
  long long b = m;
  int t = 1;
  while (a != 0) {
    while ((a & 1) == 0) {
      a >>= 1;
      long long r = b & 7;
      if (r == 3 || r == 5) t = -t;
    }
    std::swap(a, b);
    if ((a & 3) == 3 && (b & 3) == 3) t = -t;
    a %= b;
  }
  return b == 1 ? t : 0;
}

// factorization by trial division; cofactors with a prime factor beyond the
// 1e7 trial cap are rejected (everything factored here arrives small)
inline std::vector<std::pair<long long, int>> factorize(long long n) {
  if (n == 0) throw domain_error("factorize: n must be nonzero");
  unsigned long long m = n < 0 ? 0ull - (unsigned long long)n : (unsigned long long)n;
  std::vector<std::pair<long long, int>> out;
  auto strip = [&](unsigned long long d) {
    if (m % d == 0) {
      int e = 0;
      while (m % d == 0) {
        m /= d;
        ++e;
      }
      out.emplace_back((long long)d, e);
    }
  };
  strip(2);
  constexpr unsigned long long cap = 10'000'000ull;
  for (unsigned long long d = 3; d * d <= m && d <= cap; d += 2) strip(d);
  if (m > 1) {
    if (m > cap * cap)
      throw resource_error("factorize: cofactor exceeds trial-division cap");
    out.emplace_back((long long)m, 1);  // cofactor <= cap^2 with no factor <= cap: prime
  }
  return out;
}

// n* = product of distinct primes dividing |n|; radical(+-1) = 1
inline long long radical(long long n) {
  if (n == 0) throw domain_error("radical: n must be nonzero");
  long long r = 1;
  for (auto& [p, e] : factorize(n)) r *= p;
  return r;
}

// bulk radicals for conductor evaluation over enumeration windows
struct RadicalTable {
  std::uint32_t limit;
  std::vector<std::uint32_t> rad;  // rad[n] for 0 < n <= limit; rad[0] unused
  explicit RadicalTable(std::uint32_t lim) : limit(lim), rad(lim + 1, 1) {
    std::vector<bool> comp(lim + 1, false);
    for (std::uint64_t p = 2; p <= lim; ++p) {
      if (comp[p]) continue;
      for (std::uint64_t m = p; m <= lim; m += p) {
        rad[m] = (std::uint32_t)(rad[m] * p);
        if (m > p) comp[m] = true;
      }
    }
  }
  std::uint32_t operator()(std::uint32_t n) const { return rad[n]; }
};

// gamma(l) = (1/l) prod_{p | l} (1 - p^-2)^-1, exact
inline bigrat gamma_l(long long l) {
  if (l <= 0) throw domain_error("gamma_l: l must be positive");
  bigrat r(1, l);
  for (auto& [p, e] : factorize(l)) {
    bigint p2 = bigint(p) * p;
    r *= bigrat(p2, p2 - 1);
  }
  return r;
}

struct ThetaIntegralResult {
  std::uint64_t T;
  double theta_T;        // Chebyshev theta(T) = sum_{p<=T} log p
  double r_integral;     // int_1^T R(t)/t^2 dt, R(t) = theta(t) - t
  double tail_estimate;  // heuristic RH-sized bound on the discarded tail, K = 1
};

// Closed form by parts: int_1^T R(t)/t^2 dt = sum_{p<=T} log p/p - theta(T)/T - log T.
// (theta is a step function; the identity is verified against piecewise-exact
// quadrature at T = 100 in the test suite before anything relies on it.)
inline ThetaIntegralResult theta_and_r_integral(std::uint64_t T) {
  if (T < 2) throw domain_error("theta_and_r_integral: T must be >= 2");
  kahan_sum theta, slp;
  for_primes(T, [&](std::uint64_t p) {
    long double lp = logl((long double)p);
    theta.add(lp);
    slp.add(lp / (long double)p);
  });
  double th = (double)theta.value();
  double r = (double)(slp.value() - theta.value() / (long double)T - logl((long double)T));
  double lt = std::log((double)T);
  return {T, th, r, lt * lt / std::sqrt((double)T)};
}

}  // namespace elld
