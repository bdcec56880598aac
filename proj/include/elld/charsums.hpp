#pragma once

// Exact complete character sums over all residue pairs mod p:
//
//   Q(p^v) = sum over (a,b) mod p of lambda_{a,b}(p^v),
//
// the second moment sum lambda(p)^2, the local L-factor average feeding the
// c5/d5 constants, and the weighted family moment V(p,v).  Everything here is
// exact: a_p values are small integers, prime-power coefficients ride the
// integer recurrence A(p^{v+1}) = a_p A(p^v) - p A(p^{v-1}), and sums live in
// 128-bit or big-integer accumulators, so results are schedule-independent.

#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "families.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "rational.hpp"

namespace elld {

inline constexpr long long kApTableCap = 5000;

// a_p and bad flag for every residue pair (a, b) mod p; index a*p + b
struct ApTable {
  FamilyId family = FamilyId::f1;
  long long p = 0;
  std::vector<std::int16_t> ap;
  std::vector<std::uint8_t> bad;

  int ap_at(long long a, long long b) const { return ap[(size_t)(a * p + b)]; }
  bool bad_at(long long a, long long b) const { return bad[(size_t)(a * p + b)] != 0; }
};

namespace detail {

// inv[x] = x^{-1} mod p for x in [1, p)
inline std::vector<long long> inverse_table(long long p) {
  std::vector<long long> inv((size_t)p, 0);
  if (p > 1) inv[1] = 1;
  for (long long x = 2; x < p; ++x) inv[(size_t)x] = (p - (p / x) * inv[(size_t)(p % x)] % p) % p;
  return inv;
}

inline void check_ap_cap(long long p, const char* who) {
  if (p > kApTableCap)
    throw resource_error(std::string(who) + ": p = " + std::to_string(p) +
                         " exceeds the O(p^2) table cap " + std::to_string(kApTableCap));
  if (p < 3 || p % 2 == 0)
    throw domain_error(std::string(who) + ": p must be an odd prime, got " + std::to_string(p));
}

}  // namespace detail

// Reference implementation: one character sum per residue pair, O(p^3).
inline ApTable ap_table_naive(FamilyId fam, long long p) {
  detail::check_ap_cap(p, "ap_table_naive");
  auto chi = chi_table(p);
  ApTable t{fam, p, std::vector<std::int16_t>((size_t)(p * p)), std::vector<std::uint8_t>((size_t)(p * p))};
  for (long long a = 0; a < p; ++a)
    for (long long b = 0; b < p; ++b) {
      t.ap[(size_t)(a * p + b)] = (std::int16_t)ap_charsum(fam, a, b, p, chi.data());
      t.bad[(size_t)(a * p + b)] = divides_conductor(fam, Curve{a, b}, p) ? 1 : 0;
    }
  return t;
}

// Orbit-reduced table, O(p^2) total: only the representatives (1, t) (plus the
// a = 0 column) need character sums; scaling fills the rest.
//   F1: a_p(ea, eb)   = (e|p) a_p(a, b), so a_p(a, b) = (a|p) a_p(1, a^{-1} b)
//   F2: a_p(ea, e^2b) = (e|p) a_p(a, b), so a_p(a, b) = (a|p) a_p(1, a^{-2} b)
// F1 column a = 0 scales linearly from (0, 1); F2's scales within each square
// class, reached from (0, 1) and (0, u) for a non-residue u.
inline ApTable ap_table(FamilyId fam, long long p) {
  detail::check_ap_cap(p, "ap_table");
  auto chi = chi_table(p);
  ApTable t{fam, p, std::vector<std::int16_t>((size_t)(p * p)), std::vector<std::uint8_t>((size_t)(p * p))};

  // representative sums, embarrassingly parallel over t with disjoint writes
  std::vector<std::int16_t> rep((size_t)p);
  const long long block = 64;
  const std::size_t nblocks = (std::size_t)((p + block - 1) / block);
  parallel_blocks(nblocks, [&](std::size_t ib) {
    long long lo = (long long)ib * block, hi = std::min(lo + block, p);
    for (long long u = lo; u < hi; ++u)
      rep[(size_t)u] = (std::int16_t)ap_charsum(fam, 1, u, p, chi.data());
  });

  auto inv = detail::inverse_table(p);
  for (long long a = 1; a < p; ++a) {
    const int ca = chi[(size_t)a];
    const long long ia = inv[(size_t)a];
    const long long scale = fam == FamilyId::f1 ? ia : ia * ia % p;
    std::int16_t* row = &t.ap[(size_t)(a * p)];
    for (long long b = 0; b < p; ++b) row[b] = (std::int16_t)(ca * rep[(size_t)(scale * b % p)]);
  }

  // a = 0 column
  t.ap[0] = 0;  // (0,0) is the lone additive-type residue class
  if (fam == FamilyId::f1) {
    const int ap01 = ap_charsum(fam, 0, 1, p, chi.data());
    for (long long b = 1; b < p; ++b) t.ap[(size_t)b] = (std::int16_t)(chi[(size_t)b] * ap01);
  } else {
    long long u = 2;
    while (chi[(size_t)u] != -1) ++u;
    const int ap01 = ap_charsum(fam, 0, 1, p, chi.data());
    const int ap0u = ap_charsum(fam, 0, u, p, chi.data());
    for (long long e = 1; e < p; ++e) {
      long long e2 = e * e % p;
      t.ap[(size_t)e2] = (std::int16_t)(chi[(size_t)e] * ap01);
      t.ap[(size_t)(u * e2 % p)] = (std::int16_t)(chi[(size_t)e] * ap0u);
    }
  }

  for (long long a = 0; a < p; ++a)
    for (long long b = 0; b < p; ++b)
      t.bad[(size_t)(a * p + b)] = divides_conductor(fam, Curve{a, b}, p) ? 1 : 0;
  return t;
}

// Q(p^v) carried as numerator / p^{half_power/2} with half_power = v; exact.
struct ExactMoment {
  long long p = 0;
  int v = 0;
  bigint numerator = 0;
  int half_power = 0;

  bool is_zero() const { return numerator == 0; }

  // rational value; only representable when v is even (or the sum vanishes)
  bigrat value() const {
    if (numerator == 0) return bigrat(0);
    if (half_power % 2 != 0)
      throw numeric_error("ExactMoment::value: odd half_power with nonzero numerator is irrational");
    bigint den = 1;
    for (int k = 0; k < half_power / 2; ++k) den *= p;
    return bigrat(numerator, den);
  }
};

namespace detail {

// A(p^v) for one residue class from its a_p and bad flag
inline i128 coeff_A(long long p, long long ap, bool bad, int v) {
  if (v == 0) return 1;
  if (bad) {
    i128 r = 1;
    for (int k = 0; k < v; ++k) r *= ap;
    return r;
  }
  i128 prev = 1, cur = ap;
  for (int k = 1; k < v; ++k) {
    i128 next = (i128)ap * cur - (i128)p * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace detail

// Q(p^v) = sum over all p^2 residue classes of lambda(p^v), exact.
inline ExactMoment Q_exact(FamilyId fam, long long p, int v, const ApTable* table = nullptr) {
  detail::check_ap_cap(p, "Q_exact");
  if (v < 1 || v > 12)
    throw domain_error("Q_exact: require 1 <= v <= 12, got " + std::to_string(v));
  ApTable local;
  if (!table) {
    local = ap_table(fam, p);
    table = &local;
  }
  // |A(p^v)| <= (v+1) p^{v/2}, so the full sum stays far inside 128 bits
  i128 total = 0;
  for (long long a = 0; a < p; ++a) {
    const std::int16_t* row = &table->ap[(size_t)(a * p)];
    const std::uint8_t* brow = &table->bad[(size_t)(a * p)];
    for (long long b = 0; b < p; ++b) total += detail::coeff_A(p, row[b], brow[b] != 0, v);
  }
  return ExactMoment{p, v, bigint(to_string(total)), v};
}

// sum over all residue classes of lambda(p)^2 = (1/p) sum a_p^2.  Q(p^2) = 0
// forces sum lambda^2 = #good classes (lambda(p^2) = lambda(p)^2 - 1 at good
// classes and lambda(p)^2 at bad ones), and the good-class counts are
// (p-1)(p-2) for F1 and (p-1)^2 for F2; the table sum below re-derives that
// closed form rather than assuming it.
inline bigrat second_moment(FamilyId fam, long long p, const ApTable* table = nullptr) {
  detail::check_ap_cap(p, "second_moment");
  ApTable local;
  if (!table) {
    local = ap_table(fam, p);
    table = &local;
  }
  i128 total = 0;
  for (auto v : table->ap) total += (i128)((long long)v * v);
  return bigrat(bigint(to_string(total)), bigint(p));
}

// sum over all residue classes of (1 - lambda(p)/sqrt(p) + chi_N(p)/p)^{-1} - 1
// with chi_N(p) = 1 at good classes, 0 at bad ones:
//   good: (a_p - 1)/(p - a_p + 1);  bad: a_p/(p - a_p)  (additive a_p = 0 -> 0)
// Accumulated by a_p multiplicity, exact.
inline bigrat local_factor_sum(FamilyId fam, long long p, const ApTable* table = nullptr) {
  detail::check_ap_cap(p, "local_factor_sum");
  ApTable local;
  if (!table) {
    local = ap_table(fam, p);
    table = &local;
  }
  // a_p ranges over |a_p| <= 2 sqrt(p) < p; histogram by value and badness
  const long long off = 2 * (long long)std::sqrt((double)p) + 2;
  std::vector<long long> good_count((size_t)(2 * off + 1), 0), bad_count((size_t)(2 * off + 1), 0);
  for (size_t i = 0; i < table->ap.size(); ++i) {
    long long v = table->ap[i] + off;
    (table->bad[i] ? bad_count : good_count)[(size_t)v] += 1;
  }
  bigrat sum(0);
  for (long long v = -off; v <= off; ++v) {
    long long g = good_count[(size_t)(v + off)], bd = bad_count[(size_t)(v + off)];
    if (g) sum += bigrat(bigint(g) * (v - 1), bigint(p - v + 1));
    if (bd && v != 0) sum += bigrat(bigint(bd) * v, bigint(p - v));
  }
  return sum;
}

// V(p, v) = sum over the enumerated family of lambda_{a,b}(p^v) w(a/A, b/B).
// Leading order V = Q(p^v)/(p^2-1) * M(F) for p outside 2q.
inline double weighted_moment_V(const ScaledFamily& s, long long p, int v) {
  detail::check_ap_cap(p, "weighted_moment_V");
  if (v < 0) throw domain_error("weighted_moment_V: require v >= 0");
  if (p == 2 || s.params.q % p == 0)
    throw domain_error("weighted_moment_V: require p coprime to 2q, got p = " + std::to_string(p));
  ApTable table = ap_table(s.params.family, p);
  // lambda(p^v) per residue class, computed once
  std::vector<double> lam((size_t)(p * p));
  const long double scale = std::pow((long double)p, 0.5L * v);
  for (size_t i = 0; i < lam.size(); ++i)
    lam[i] = (double)((long double)detail::coeff_A(p, table.ap[i], table.bad[i] != 0, v) / scale);
  kahan_sum acc;
  enumerate(s, [&](Curve c, double w) {
    long long am = detail::mod_reduce(c.a, p), bm = detail::mod_reduce(c.b, p);
    acc.add(w * lam[(size_t)(am * p + bm)]);
  });
  return (double)acc.value();
}

}  // namespace elld
