#pragma once

// The two elliptic-curve families and their per-curve invariants.
//
//   F1: y^2 = x(x - a)(x + 2b),      N = 2^5 a* b* (a+2b)*,  A = B = X^{1/3}
//   F2: y^2 = x(x^2 + 2ax - b),      N = 2^6 b* (a^2+b)*,    A = X^{1/4}, B = X^{1/2}
//
// (n* = rad(n).)  Members are indexed by coprime pairs (a,b) in fixed residue
// classes mod 2^i q (i = 1 for F1, i = 2 for F2) with a/A, b/B in the support
// of a smooth weight.  Both families have additive reduction exactly at p = 2,
// where lambda(2) = 0; at every odd p the reduction is good or multiplicative.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"
#include "primes.hpp"
#include "weights.hpp"

namespace elld {

enum class FamilyId { f1, f2 };

inline const char* family_name(FamilyId f) { return f == FamilyId::f1 ? "F1" : "F2"; }

struct FamilyTraits {
  int delta;             // independent conductor factors: delta_1 = 3, delta_2 = 2
  int two_exponent;      // i in the residue modulus 2^i q
  double support_bound;  // rho_max for supp(phi_hat) in the density theorems
};

inline FamilyTraits traits(FamilyId f) {
  return f == FamilyId::f1 ? FamilyTraits{3, 1, 2.0 / 3.0}
                           : FamilyTraits{2, 2, 1.0 / 2.0};
}

struct Curve {
  long long a = 0;
  long long b = 0;
};

// Residue data selecting a subfamily: a == r, b == t (mod 2^i q), where
// r == a0 (mod q), r == 1 (mod 2^i), and likewise t from b0.
struct FamilyParams {
  FamilyId family = FamilyId::f1;
  long long q = 1;
  long long a0 = 1;
  long long b0 = 1;
  long long r = 1;
  long long t = 1;

  long long modulus() const { return (1LL << traits(family).two_exponent) * q; }
};

namespace detail {

inline long long mod_reduce(long long x, long long m) {
  long long v = x % m;
  return v < 0 ? v + m : v;
}

// smallest prime p | q satisfying cond(p); admissibility diagnostics only
template <class Cond>
long long smallest_prime_factor_where(long long q, Cond&& cond) {
  auto fac = factorize(q);
  std::vector<long long> ps;
  ps.reserve(fac.size());
  for (auto& [p, e] : fac) ps.push_back(p);
  std::sort(ps.begin(), ps.end());
  for (long long p : ps)
    if (cond(p)) return p;
  return 0;
}

}  // namespace detail

// Checks the defining coprimality of (q, a0, b0) and solves the CRT for the
// residues r, t mod 2^i q.  The offending prime reported on failure is the
// smallest prime divisor of q meeting the obstruction.
inline FamilyParams validate_and_residues(FamilyId fam, long long q, long long a0, long long b0) {
  if (q <= 0 || q % 2 == 0)
    throw domain_error("validate_and_residues: q must be odd and positive, got " + std::to_string(q));
  const int i = traits(fam).two_exponent;
  const long long two_i = 1LL << i;

  if (q > 1) {
    // reduce mod p before multiplying so a0^2 etc. cannot overflow
    auto obstructed = [&](long long p) {
      long long am = detail::mod_reduce(a0, p), bm = detail::mod_reduce(b0, p);
      if (fam == FamilyId::f1) return am == 0 || bm == 0 || (am + 2 * bm) % p == 0;
      return bm == 0 || (am * am + bm) % p == 0;
    };
    if (long long p = detail::smallest_prime_factor_where(q, obstructed); p != 0) {
      std::string what = std::string("validate_and_residues: ") + family_name(fam) +
                         (fam == FamilyId::f1 ? ": p | a0*b0*(a0+2*b0)" : ": p | b0*(a0^2+b0)") +
                         " with p = " + std::to_string(p);
      throw admissibility_error(what, p);
    }
  }

  // CRT: x == x0 (mod q), x == 1 (mod 2^i).  q odd, so q^{-1} mod 2^i exists;
  // for i <= 2 the inverse is q mod 2^i itself (q*q == 1 mod 8).
  auto crt = [&](long long x0) {
    long long xq = detail::mod_reduce(x0, q);
    long long k = detail::mod_reduce((1 - xq) * (q % two_i), two_i);
    return xq + q * k;  // in [0, 2^i q)
  };
  return FamilyParams{fam, q, a0, b0, crt(a0), crt(b0)};
}

// Curve-level admissibility; the residue-class congruences are a property of
// an attached FamilyParams, enforced separately by enumerate.
inline bool is_admissible_curve(FamilyId fam, Curve c) {
  if (std::gcd(c.a, c.b) != 1) return false;
  if (fam == FamilyId::f1) return detail::mod_reduce(c.a, 2) == 1 && detail::mod_reduce(c.b, 2) == 1;
  return detail::mod_reduce(c.a, 4) == 1 && detail::mod_reduce(c.b, 4) == 1;
}

struct ScaledFamily {
  FamilyParams params;
  double X = 0;
  double A = 0;
  double B = 0;
  WeightFunction weight;
};

inline ScaledFamily make_scaled(const FamilyParams& params, double X, WeightFunction w) {
  if (!(X >= 100))
    throw domain_error("make_scaled: require X >= 100, got " + std::to_string(X));
  ScaledFamily s{params, X, 0, 0, std::move(w)};
  if (params.family == FamilyId::f1) {
    s.A = s.B = std::cbrt(X);
  } else {
    s.A = std::pow(X, 0.25);
    s.B = std::sqrt(X);
  }
  return s;
}

// Arithmetic-progression window along one axis: first + step*k, 0 <= k < count.
struct Progression {
  long long first = 0;
  long long step = 1;
  long long count = 0;

  long long at(long long k) const { return first + step * k; }
};

namespace detail {

inline Progression window_progression(double lo, double hi, long long residue, long long m) {
  long long v_lo = (long long)std::ceil(lo);
  long long v_hi = (long long)std::floor(hi);
  if (v_lo > v_hi) return Progression{0, m, 0};
  long long first = v_lo + mod_reduce(residue - v_lo, m);
  if (first > v_hi) return Progression{0, m, 0};
  return Progression{first, m, (v_hi - first) / m + 1};
}

}  // namespace detail

// The a- and b-progressions covering the support box.  Exposed so consumers
// can split the a-axis into fixed blocks for deterministic parallel
// reductions; enumerate() is the serial reference order.
struct EnumWindow {
  Progression a;
  Progression b;
};

inline EnumWindow make_enum_window(const ScaledFamily& s) {
  const auto& w = s.weight;
  long long m = s.params.modulus();
  return EnumWindow{detail::window_progression(s.A * w.x_lo, s.A * w.x_hi, s.params.r, m),
                    detail::window_progression(s.B * w.y_lo, s.B * w.y_hi, s.params.t, m)};
}

// Streams (curve, weight) with a then b ascending.  Pairs with gcd(a,b) > 1
// are skipped; boundary pairs are emitted with weight 0 rather than culled.
template <class Fn>
void enumerate(const ScaledFamily& s, Fn&& fn) {
  const EnumWindow win = make_enum_window(s);
  for (long long ia = 0; ia < win.a.count; ++ia) {
    long long a = win.a.at(ia);
    for (long long ib = 0; ib < win.b.count; ++ib) {
      long long b = win.b.at(ib);
      if (std::gcd(a, b) != 1) continue;
      fn(Curve{a, b}, s.weight.eval((double)a / s.A, (double)b / s.B));
    }
  }
}

// N = 2^5 rad(a) rad(b) rad(a+2b)  /  2^6 rad(b) rad(a^2+b).  The radical
// arguments stay below ~X^{2/3} and ~X, so the product is 128-bit safe up to
// X = 10^12.  An optional radical table accelerates arguments below its limit.
inline i128 conductor(FamilyId fam, Curve c, const RadicalTable* table = nullptr) {
  if (!is_admissible_curve(fam, c))
    throw domain_error("conductor: inadmissible curve (" + std::to_string(c.a) + ", " +
                       std::to_string(c.b) + ")");
  auto rad = [&](i128 n) -> i128 {
    if (n < 0) n = -n;
    if (table && n <= (i128)table->limit) return (i128)(*table)((std::uint32_t)n);
    return (i128)radical((long long)n);
  };
  if (fam == FamilyId::f1)
    return (i128)32 * rad(c.a) * rad(c.b) * rad((i128)c.a + 2 * (i128)c.b);
  return (i128)64 * rad(c.b) * rad((i128)c.a * c.a + c.b);
}

enum class Reduction { good, multiplicative };

// p | N depends only on (a, b) mod p; this predicate is that residue test.
inline bool divides_conductor(FamilyId fam, Curve c, long long p) {
  long long am = detail::mod_reduce(c.a, p), bm = detail::mod_reduce(c.b, p);
  if (fam == FamilyId::f1) return am == 0 || bm == 0 || (am + 2 * bm) % p == 0;
  return bm == 0 || (am * am + bm) % p == 0;
}

inline Reduction reduction_type(FamilyId fam, Curve c, long long p) {
  if (p == 2)
    throw domain_error("reduction_type: additive at p = 2 for every member; lambda(2) = 0 is handled separately");
  if (p < 3 || p % 2 == 0)
    throw domain_error("reduction_type: p must be an odd prime, got " + std::to_string(p));
  if (!is_admissible_curve(fam, c)) throw domain_error("reduction_type: inadmissible curve");
  return divides_conductor(fam, c, p) ? Reduction::multiplicative : Reduction::good;
}

// chi[x] = Legendre symbol (x|p) for x in [0, p)
inline std::vector<std::int8_t> chi_table(long long p) {
  std::vector<std::int8_t> chi((size_t)p, -1);
  chi[0] = 0;
  for (long long x = 1; x <= (p - 1) / 2; ++x) chi[(size_t)((x * x) % p)] = 1;
  return chi;
}

namespace detail {

// family cubic f(x) mod p; am, bm, x already reduced to [0, p)
inline long long cubic_mod_p(FamilyId fam, long long am, long long bm, long long x, long long p) {
  if (fam == FamilyId::f1) {
    long long t = x * mod_reduce(x - am, p) % p;
    return t * ((x + 2 * bm) % p) % p;
  }
  long long t = mod_reduce(x * x + 2 * am * x - bm, p);
  return x * t % p;
}

}  // namespace detail

// a_p = -sum_{x mod p} (f(x)|p), exact; the authoritative value at every odd
// prime, good or multiplicative (lambda(p) = a_p / sqrt(p)).
inline int ap_charsum(FamilyId fam, long long a, long long b, long long p, const std::int8_t* chi) {
  long long am = detail::mod_reduce(a, p), bm = detail::mod_reduce(b, p);
  long long s = 0;
  for (long long x = 0; x < p; ++x) s += chi[detail::cubic_mod_p(fam, am, bm, x, p)];
  return (int)(-s);
}

inline int ap_charsum(FamilyId fam, long long a, long long b, long long p) {
  if (p < 3 || p % 2 == 0)
    throw domain_error("ap_charsum: p must be an odd prime, got " + std::to_string(p));
  auto chi = chi_table(p);
  return ap_charsum(fam, a, b, p, chi.data());
}

inline double lambda_p(FamilyId fam, Curve c, long long p) {
  if (p == 2) return 0.0;  // additive at 2 in both families
  return ap_charsum(fam, c.a, c.b, p) / std::sqrt((double)p);
}

// lambda(p^v) through the exact integer normalization A(p^v) = lambda(p^v) p^{v/2}:
//   good p:  A(p^{v+1}) = a_p A(p^v) - p A(p^{v-1})
//   bad p:   A(p^v) = a_p^v   (and p = 2: lambda = 0 for v >= 1)
// Carrying A instead of lambda keeps the recurrence drift-free.
inline double lambda_prime_power(FamilyId fam, Curve c, long long p, int v) {
  if (v < 0) throw domain_error("lambda_prime_power: require v >= 0, got " + std::to_string(v));
  if (v == 0) return 1.0;
  if (p == 2) return 0.0;
  const long long ap = ap_charsum(fam, c.a, c.b, p);
  i128 A;
  if (divides_conductor(fam, c, p)) {
    A = 1;
    for (int k = 0; k < v; ++k) A *= ap;
  } else {
    i128 prev = 1, cur = ap;  // A(p^0), A(p^1)
    for (int k = 1; k < v; ++k) {
      i128 next = (i128)ap * cur - (i128)p * prev;
      prev = cur;
      cur = next;
    }
    A = cur;
  }
  return (double)((long double)A / std::pow((long double)p, 0.5L * v));
}

// Brute-force count of nonsingular points on the reduction mod p, including
// the point at infinity.  Cross-check oracle: at multiplicative p,
// a_p = p - #E_ns; at good p, a_p = p + 1 - #E.
inline long long count_nonsingular_points(FamilyId fam, Curve c, long long p) {
  auto chi = chi_table(p);
  long long am = detail::mod_reduce(c.a, p), bm = detail::mod_reduce(c.b, p);
  // f' for F1: 3x^2 + 2(2b-a)x - 2ab; for F2: 3x^2 + 4ax - b
  auto fprime = [&](long long x) {
    if (fam == FamilyId::f1)
      return detail::mod_reduce(3 * x * x + 2 * detail::mod_reduce(2 * bm - am, p) * x - 2 * am * bm, p);
    return detail::mod_reduce(3 * x * x + 4 * am * x - bm, p);
  };
  long long count = 1;  // infinity
  for (long long x = 0; x < p; ++x) {
    long long fx = detail::cubic_mod_p(fam, am, bm, x, p);
    if (fx == 0) {
      if (fprime(x) != 0) count += 1;  // (x, 0) nonsingular
    } else if (chi[(size_t)fx] == 1) {
      count += 2;
    }
  }
  return count;
}

// Closed-form multiplicative-prime table (Legendre symbols in a, b), checked
// class-by-class against the authoritative character sum.  The case p | (a+2b)
// of F1 is stated as (2b|p) = (-a|p), but the sum evaluates to (a|p); the two
// differ by the factor (-1|p), so every class of that case with p == 3 (mod 4)
// is expected to land in `mismatch`.  The report records the counts and adopts
// neither value.
struct LemmaTableRow {
  long long p = 0;
  int p_mod_4 = 0;
  std::string case_label;  // which conductor factor p divides
  long long agree = 0;
  long long mismatch = 0;
};

struct LemmaTableReport {
  FamilyId family = FamilyId::f1;
  std::vector<LemmaTableRow> rows;
  bool any_mismatch = false;
};

inline LemmaTableReport lemma_table_cross_check(FamilyId fam, long long p_max) {
  LemmaTableReport rep;
  rep.family = fam;
  const std::vector<const char*> labels =
      fam == FamilyId::f1 ? std::vector<const char*>{"p|a", "p|b", "p|(a+2b)"}
                          : std::vector<const char*>{"p|b", "p|(a^2+b)"};
  for_primes((std::uint64_t)p_max + 1, [&](std::uint64_t pu) {
    const long long p = (long long)pu;
    if (p == 2) return;
    auto chi = chi_table(p);
    std::vector<LemmaTableRow> rows;
    for (const char* label : labels) rows.push_back(LemmaTableRow{p, (int)(p % 4), label, 0, 0});
    for (long long a = 0; a < p; ++a) {
      for (long long b = 0; b < p; ++b) {
        if (a == 0 && b == 0) continue;  // additive class, never attained: gcd(a,b) = 1
        int which;                       // row index, or -1 when the class is good
        long long pred;                  // table prediction for a_p = lambda sqrt(p)
        if (fam == FamilyId::f1) {
          if (a == 0) {
            which = 0;
            pred = chi[(size_t)(2 * b % p)];
          } else if (b == 0) {
            which = 1;
            pred = chi[(size_t)detail::mod_reduce(-a, p)];
          } else if ((a + 2 * b) % p == 0) {
            which = 2;
            pred = chi[(size_t)(2 * b % p)];  // the stated "= (-a|p)" form is identical mod p
          } else {
            which = -1;
            pred = 0;
          }
        } else {
          if (b == 0) {
            which = a == 0 ? -1 : 0;
            pred = which == 0 ? chi[(size_t)(2 * a % p)] : 0;
          } else if ((a * a + b) % p == 0) {
            which = 1;
            pred = chi[(size_t)detail::mod_reduce(-a, p)];
          } else {
            which = -1;
            pred = 0;
          }
        }
        if (which < 0) continue;
        long long got = ap_charsum(fam, a, b, p, chi.data());
        if (got == pred)
          rows[(size_t)which].agree += 1;
        else
          rows[(size_t)which].mismatch += 1;
      }
    }
    for (auto& row : rows) {
      if (row.mismatch > 0) rep.any_mismatch = true;
      rep.rows.push_back(row);
    }
  });
  return rep;
}

}  // namespace elld
