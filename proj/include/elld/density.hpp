#pragma once

// Explicit-formula evaluation of 1-level density statistics.
//
// For a curve E of conductor N and an even test pair (phi, phi_hat) with
// supp(phi_hat) in [-rho, rho], writing L = log X:
//
//   D(E; phi) = phihat(0) log N / L                                 (conductor)
//             + (2/L) Int phi(x) { -log 2pi + Re psi(1 + 2pi i x/L) } dx (gamma)
//             - 2 Sum_{p | N} (log p/L) Sum_v lambda(p)^v p^{-v/2} phihat(v log p/L)
//             + Sum_{p !| N} (2 log p/(pL)) phihat(2 log p/L)             (pnt)
//             - 2 Sum_{p !| N} (log p/L) Sum_v (lambda(p^v)/p^{v/2})
//                   [ phihat(v log p/L) - p^{-1} phihat((v+2) log p/L) ]  (good)
//
// lambda here is the normalized eigenvalue, so in the integer Hecke values
// A(p^v) the v-th good summand is A(p^v) p^{-v} and the v-th bad summand is
// a_p^v p^{-v} (each lambda power carries 1/sqrt(p), and the explicit formula
// contributes one more p^{-v/2}).
//
// Every prime/v sum is finite because phi_hat vanishes outside its support;
// the total equals the sum over zeros identically, so zeros never appear.
// Family averaging shares a per-curve kernel between the residue-table path
// and the direct character-sum path, so the two agree bit-for-bit.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "charsums.hpp"
#include "constants.hpp"
#include "digamma.hpp"
#include "errors.hpp"
#include "families.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "primes.hpp"
#include "quadrature.hpp"
#include "testfunc.hpp"

namespace elld {

// ---------------------------------------------------------------------------
// gamma term

namespace detail {

inline constexpr double kGammaCutoff = 1e4;  // x-cutoff of the digamma quadrature

// tail of Int_T^inf phi(x) Re psi(1 + icx) dx.  Both kinds decay like an
// oscillation times a rational envelope; the smooth part (fejer only) uses
// Stirling Re psi ~ log(1+c^2x^2)/2 - 1/(2(1+c^2x^2)) in closed form, the
// oscillatory part one integration by parts (boundary term kept, derivative
// term O(log T/T^3) dropped).  Residual ~ 1e-11 at T = 1e4.
inline double gamma_tail(const TestFunctionPair& test, double c, double T) {
  const double rho = test.rho;
  const double re_psi_T = re_digamma_1i(c * T);
  if (test.kind == TestKind::fejer) {
    // phi = [1 - cos(2 pi rho x)] / (2 pi^2 rho x^2)
    const double env = 1.0 / (2.0 * M_PI * M_PI * rho);
    const double smooth_log =
        0.5 * env * (M_PI * c + std::log1p(c * c * T * T) / T - 2.0 * c * std::atan(c * T));
    const double smooth_inv =
        -0.5 * env * (1.0 / T - c * (M_PI / 2.0 - std::atan(c * T)));
    const double osc =
        std::sin(2.0 * M_PI * rho * T) / (2.0 * M_PI * rho) * (env / (T * T)) * re_psi_T;
    return smooth_log + smooth_inv + osc;
  }
  // cosine_sq: phi = sin(2 pi rho x) * g(x), g = -1 / (2 pi x (4 rho^2 x^2 - 1))
  const double g = -1.0 / (2.0 * M_PI * T * (4.0 * rho * rho * T * T - 1.0));
  return std::cos(2.0 * M_PI * rho * T) * g * re_psi_T / (2.0 * M_PI * rho);
}

}  // namespace detail

// (2/L) Int_R phi(x) {-log 2pi + Re psi(1 + 2pi i x / L)} dx, by even symmetry
// quadrature on [0, T] plus the analytic tail.  Absolute accuracy ~ 1e-9.
inline double gamma_term(double X, const TestFunctionPair& test, double quad_tol = 1e-9) {
  if (!(X >= 100)) throw domain_error("gamma_term: require X >= 100");
  const double L = std::log(X);
  const double c = 2.0 * M_PI / L;
  const double T = detail::kGammaCutoff;
  const auto integrand = [&](double x) { return test.phi(x) * re_digamma_1i(c * x); };
  const double I = integrate_adaptive(integrand, 0.0, T, quad_tol).value;
  const double tail = detail::gamma_tail(test, c, T);
  return (2.0 / L) * (-std::log(2.0 * M_PI)) * test.phihat0 + (4.0 / L) * (I + tail);
}

// ---------------------------------------------------------------------------
// per-curve explicit formula

struct DensityValue {
  double total = 0;
  double term_conductor = 0;
  double term_gamma = 0;
  double term_bad = 0;
  double term_pnt = 0;
  double term_good = 0;
};

// Everything about (X, test) that is shared across curves: the gamma term,
// per-prime phi_hat weights and p^{-v/2} powers up to the exact support
// cutoffs, and the lambda-independent pnt sum over all candidate primes.
struct DensityContext {
  double X = 0;
  double L = 0;
  TestFunctionPair test;
  double gamma = 0;

  struct PrimeData {
    long long p = 0;
    double logp = 0;
    int nu_max = 0;                // largest v with v log p < rho L
    std::vector<double> inv_pow;   // p^{-v}, v = 0..nu_max
    std::vector<double> ph1;       // phihat(v log p / L), v = 0..nu_max
    std::vector<double> ph2;       // phihat((v+2) log p / L), v = 0..nu_max
    double pnt_term = 0;           // (2 log p / (pL)) phihat(2 log p / L)
  };
  std::vector<PrimeData> primes;   // ascending odd p with log p < rho L
  double pnt_all = 0;              // sum of pnt_term over every listed prime
};

inline DensityContext make_density_context(double X, const TestFunctionPair& test,
                                           double quad_tol = 1e-9) {
  if (!(X >= 100)) throw domain_error("make_density_context: require X >= 100");
  DensityContext ctx;
  ctx.X = X;
  ctx.L = std::log(X);
  ctx.test = test;
  ctx.gamma = gamma_term(X, test, quad_tol);
  const double rhoL = test.rho * ctx.L;
  // p = 2 never enters: 2 | N for every member and lambda(2) = 0
  kahan_sum pnt_acc;
  for_primes((std::uint64_t)std::floor(std::exp(rhoL)) + 1, [&](std::uint64_t pu) {
    const long long p = (long long)pu;
    if (p == 2) return;
    const double logp = std::log((double)p);
    if (!(logp < rhoL)) return;  // phihat vanishes at and beyond the boundary
    DensityContext::PrimeData d;
    d.p = p;
    d.logp = logp;
    d.nu_max = (int)std::floor(rhoL / logp);
    while (d.nu_max * logp >= rhoL) --d.nu_max;
    const double pinv = 1.0 / (double)p;
    d.inv_pow.resize((size_t)d.nu_max + 1);
    d.ph1.resize((size_t)d.nu_max + 1);
    d.ph2.resize((size_t)d.nu_max + 1);
    for (int v = 0; v <= d.nu_max; ++v) {
      d.inv_pow[(size_t)v] = std::pow(pinv, v);
      d.ph1[(size_t)v] = test.phi_hat(v * logp / ctx.L);
      d.ph2[(size_t)v] = test.phi_hat((v + 2) * logp / ctx.L);
    }
    d.pnt_term = 2.0 * logp / ((double)p * ctx.L) * test.phi_hat(2.0 * logp / ctx.L);
    pnt_acc.add(d.pnt_term);
    ctx.primes.push_back(std::move(d));
  });
  ctx.pnt_all = (double)pnt_acc.value();
  return ctx;
}

// The shared per-curve kernel.  ap_of(i) must return the exact integer a_p
// for ctx.primes[i]; both the residue-table path and the direct path feed
// this same code, making their outputs bit-identical.
template <class ApOf>
DensityValue curve_density_terms(FamilyId fam, Curve c, const DensityContext& ctx,
                                 double log_conductor, ApOf&& ap_of) {
  DensityValue out;
  out.term_conductor = ctx.test.phihat0 * log_conductor / ctx.L;
  out.term_gamma = ctx.gamma;
  kahan_sum bad_acc, good_acc, pnt_corr;
  for (size_t i = 0; i < ctx.primes.size(); ++i) {
    const auto& d = ctx.primes[i];
    if (divides_conductor(fam, c, d.p)) {
      // multiplicative: lambda(p)^v = a_p^v p^{-v/2}, a_p in {-1, 0, +1}
      const long long ap = ap_of(i);
      if (ap != 0) {
        double s = 0;
        double sign = 1;
        for (int v = 1; v <= d.nu_max; ++v) {
          sign *= (double)ap;
          s += sign * d.inv_pow[(size_t)v] * d.ph1[(size_t)v];
        }
        bad_acc.add(-2.0 * d.logp / ctx.L * s);
      }
      pnt_corr.add(-d.pnt_term);
    } else {
      const long long ap = ap_of(i);
      const double pinv = 1.0 / (double)d.p;
      double s = 0;
      i128 prev = 1, cur = ap;  // A(p^0), A(p^1)
      for (int v = 1; v <= d.nu_max; ++v) {
        s += (double)(long long)cur * d.inv_pow[(size_t)v] *
             (d.ph1[(size_t)v] - pinv * d.ph2[(size_t)v]);
        const i128 next = (i128)ap * cur - (i128)d.p * prev;
        prev = cur;
        cur = next;
      }
      good_acc.add(-2.0 * d.logp / ctx.L * s);
    }
  }
  out.term_bad = (double)bad_acc.value();
  out.term_good = (double)good_acc.value();
  out.term_pnt = ctx.pnt_all + (double)pnt_corr.value();
  out.total = out.term_conductor + out.term_gamma + out.term_bad + out.term_pnt + out.term_good;
  return out;
}

inline DensityValue explicit_formula_value(FamilyId fam, Curve c, double X,
                                           const TestFunctionPair& test) {
  if (!is_admissible_curve(fam, c)) throw domain_error("explicit_formula_value: inadmissible curve");
  const DensityContext ctx = make_density_context(X, test);
  const double log_n = (double)std::log((long double)conductor(fam, c));
  return curve_density_terms(fam, c, ctx, log_n,
                             [&](size_t i) { return (long long)ap_charsum(fam, c.a, c.b, ctx.primes[i].p); });
}

// ---------------------------------------------------------------------------
// family averaging

// O(p) residue-level a_p lookup built from the orbit representatives; the
// values agree with ap_table (same reduction) while using O(p) memory.
struct ApLookup {
  FamilyId family = FamilyId::f1;
  long long p = 0;
  std::vector<std::int8_t> chi;
  std::vector<std::int32_t> inv;
  std::vector<std::int16_t> rep;   // a_p(1, u)
  std::vector<std::int16_t> col0;  // a_p(0, b)

  int ap_at(long long am, long long bm) const {
    if (am == 0) return col0[(size_t)bm];
    const long long ia = inv[(size_t)am];
    const long long scale = family == FamilyId::f1 ? ia : ia * ia % p;
    return chi[(size_t)am] * rep[(size_t)(scale * bm % p)];
  }
};

inline ApLookup make_ap_lookup(FamilyId fam, long long p) {
  ApLookup lk;
  lk.family = fam;
  lk.p = p;
  lk.chi = chi_table(p);
  auto inv64 = detail::inverse_table(p);
  lk.inv.assign(inv64.begin(), inv64.end());
  lk.rep.resize((size_t)p);
  for (long long u = 0; u < p; ++u)
    lk.rep[(size_t)u] = (std::int16_t)ap_charsum(fam, 1, u, p, lk.chi.data());
  lk.col0.assign((size_t)p, 0);
  if (fam == FamilyId::f1) {
    const int ap01 = ap_charsum(fam, 0, 1, p, lk.chi.data());
    for (long long b = 1; b < p; ++b) lk.col0[(size_t)b] = (std::int16_t)(lk.chi[(size_t)b] * ap01);
  } else {
    long long u = 2;
    while (lk.chi[(size_t)u] != -1) ++u;
    const int ap01 = ap_charsum(fam, 0, 1, p, lk.chi.data());
    const int ap0u = ap_charsum(fam, 0, u, p, lk.chi.data());
    for (long long e = 1; e < p; ++e) {
      const long long e2 = e * e % p;
      lk.col0[(size_t)e2] = (std::int16_t)(lk.chi[(size_t)e] * ap01);
      lk.col0[(size_t)(u * e2 % p)] = (std::int16_t)(lk.chi[(size_t)e] * ap0u);
    }
  }
  return lk;
}

struct FamilyDensityResult {
  double empirical = 0;          // weighted average of D(E; phi)
  double W = 0;                  // weighted family count
  double avg_log_conductor = 0;  // weighted average of log N / log X
  long long curve_count = 0;
};

// Weighted explicit-formula average over the enumerated family.  Residue
// tables require every context prime below the table cap; deterministic
// blocked a-strip reduction keeps the result independent of thread count.
inline FamilyDensityResult family_density(const ScaledFamily& s, const TestFunctionPair& test,
                                          double quad_tol = 1e-9) {
  if (!(test.rho < traits(s.params.family).support_bound))
    throw domain_error("family_density: test support exceeds the family's theorem range");
  if (std::pow(s.X, test.rho) > (double)kApTableCap)
    throw resource_error("family_density: X^rho = " + std::to_string(std::pow(s.X, test.rho)) +
                         " exceeds the residue-table cap " + std::to_string(kApTableCap));
  const DensityContext ctx = make_density_context(s.X, test, quad_tol);

  const FamilyId fam = s.params.family;
  std::vector<ApLookup> lookups(ctx.primes.size());
  parallel_blocks(ctx.primes.size(), [&](std::size_t i) {
    lookups[i] = make_ap_lookup(fam, ctx.primes[i].p);
  });

  // radical table sized for the largest conductor factor in the window; above
  // the memory cap the conductor falls back to direct factorization per value
  const double amax = s.A * s.weight.x_hi, bmax = s.B * s.weight.y_hi;
  const double need = fam == FamilyId::f1 ? amax + 2.0 * bmax + 2.0 : amax * amax + bmax + 2.0;
  const RadicalTable rtab((std::uint32_t)std::min(need, 3.2e7));
  const RadicalTable* rt = &rtab;

  const EnumWindow win = make_enum_window(s);
  constexpr long long kAStride = 64;  // fixed blocks: schedule-independent sums
  const std::size_t nblocks = (std::size_t)((win.a.count + kAStride - 1) / kAStride);
  struct BlockSums {
    kahan_sum w, kernel, logn;
    long long count = 0;
  };
  std::vector<BlockSums> blocks(nblocks == 0 ? 1 : nblocks);

  parallel_blocks(nblocks, [&](std::size_t ib) {
    BlockSums& bs = blocks[ib];
    std::vector<long long> am(ctx.primes.size()), bm(ctx.primes.size());
    const long long ia_hi = std::min(win.a.count, ((long long)ib + 1) * kAStride);
    for (long long ia = (long long)ib * kAStride; ia < ia_hi; ++ia) {
      const long long a = win.a.at(ia);
      for (size_t i = 0; i < ctx.primes.size(); ++i)
        am[i] = detail::mod_reduce(a, ctx.primes[i].p);
      for (long long ib2 = 0; ib2 < win.b.count; ++ib2) {
        const long long b = win.b.at(ib2);
        if (std::gcd(a, b) != 1) continue;
        const double w = s.weight.eval((double)a / s.A, (double)b / s.B);
        const Curve c{a, b};
        for (size_t i = 0; i < ctx.primes.size(); ++i)
          bm[i] = detail::mod_reduce(b, ctx.primes[i].p);
        const double log_n = (double)std::log((long double)conductor(fam, c, rt));
        const DensityValue dv = curve_density_terms(
            fam, c, ctx, log_n, [&](size_t i) { return (long long)lookups[i].ap_at(am[i], bm[i]); });
        bs.w.add(w);
        bs.kernel.add(w * dv.total);
        bs.logn.add(w * log_n);
        bs.count += 1;
      }
    }
  });

  kahan_sum w_total, kernel_total, logn_total;
  long long count = 0;
  for (auto& bs : blocks) {
    w_total.add((double)bs.w.value());
    kernel_total.add((double)bs.kernel.value());
    logn_total.add((double)bs.logn.value());
    count += bs.count;
  }
  if (count == 0) throw domain_error("family_density: empty family (window contains no curves)");
  FamilyDensityResult r;
  r.W = (double)w_total.value();
  r.empirical = (double)kernel_total.value() / r.W;
  r.avg_log_conductor = (double)logn_total.value() / r.W / ctx.L;
  r.curve_count = count;
  return r;
}

// ---------------------------------------------------------------------------
// comparison report

struct DensityReport {
  ScaledFamily scaled;
  TestFunctionPair test;
  double empirical = 0;
  double predicted = 0;
  double residual = 0;         // empirical - predicted
  double residual_scaled = 0;  // residual * log^2 X
  double W_X = 0;
};

inline DensityReport compare_report(const ScaledFamily& s, const TestFunctionPair& test,
                                    const TruncationParams& trunc = {}) {
  DensityReport rep;
  rep.scaled = s;
  rep.test = test;
  const auto fd = family_density(s, test, trunc.quad_tol);
  rep.empirical = fd.empirical;
  rep.W_X = fd.W;
  rep.predicted = predicted_density(s, test, trunc);
  rep.residual = rep.empirical - rep.predicted;
  const double L = std::log(s.X);
  rep.residual_scaled = rep.residual * L * L;
  return rep;
}

// ---------------------------------------------------------------------------
// gamma-term series check

// c2 phihat(0)/L - 2 sum_{1<=l<=M} zeta(1+2l) phihat^{(2l)}(0) L^{-2l-1}.
// Requires the cosine_sq kind: fejer's phi_hat is not differentiable at 0.
inline double gamma_term_series_check(double X, const TestFunctionPair& test, int M) {
  if (test.kind != TestKind::cosine_sq)
    throw domain_error("gamma_term_series_check: requires the cosine_sq kind");
  if (M < 0 || M > 3) throw domain_error("gamma_term_series_check: require 0 <= M <= 3");
  static constexpr double kZetaOdd[4] = {0.0,
                                         1.2020569031595943,   // zeta(3)
                                         1.0369277551433699,   // zeta(5)
                                         1.0083492773819228};  // zeta(7)
  const double L = std::log(X);
  const double c2 = -2.0 * std::log(2.0 * M_PI) - 2.0 * kEulerGamma;
  double out = c2 * test.phihat0 / L;
  for (int l = 1; l <= M; ++l)
    out -= 2.0 * kZetaOdd[l] * test.phihat_deriv_2l_at0(l) * std::pow(L, -2.0 * l - 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// biased families

enum class BiasSign { plus, minus };

struct BiasSpec {
  int n = 0;
  BiasSign sign = BiasSign::minus;
  bigint q_n = 1;
  bigint a0n = 1;
  bigint b0n = 1;
  struct PerPrime {
    long long p = 0;
    long long a_res = 0;
    long long b_res = 0;
    double lambda = 0;
  };
  std::vector<PerPrime> per_prime;
  double e_value = 0;
  double growth_ratio = 0;  // |e| / sqrt(log q_n), reported (not asserted)
};

namespace detail {

inline long long inv_mod(long long a, long long m) {
  long long t = 0, new_t = 1, r = m, new_r = a % m;
  if (new_r < 0) new_r += m;
  while (new_r != 0) {
    const long long quot = r / new_r;
    t -= quot * new_t;
    std::swap(t, new_t);
    r -= quot * new_r;
    std::swap(r, new_r);
  }
  if (r != 1) throw domain_error("inv_mod: arguments not coprime");
  return t < 0 ? t + m : t;
}

}  // namespace detail

// Theorem 1.5 construction: for each odd p <= n pick the good-reduction class
// extremizing lambda(p) (minus: most negative a_p, raising e; plus: most
// positive), ties to the lexicographically smallest (a, b), then CRT-combine.
inline BiasSpec bias_builder(FamilyId fam, int n, BiasSign sign) {
  if (n < 3) throw domain_error("bias_builder: require n >= 3 (empty prime product)");
  if (n > 97) throw domain_error("bias_builder: require n <= 97");
  BiasSpec spec;
  spec.n = n;
  spec.sign = sign;
  std::vector<std::pair<long long, long long>> pap;
  for_primes((std::uint64_t)n, [&](std::uint64_t pu) {
    const long long p = (long long)pu;
    if (p == 2) return;
    const ApTable table = ap_table(fam, p);
    long long best_a = -1, best_b = -1, best_ap = 0;
    for (long long a = 0; a < p; ++a)
      for (long long b = 0; b < p; ++b) {
        if (table.bad_at(a, b)) continue;
        const long long ap = table.ap_at(a, b);
        const bool better = best_a < 0 || (sign == BiasSign::minus ? ap < best_ap : ap > best_ap);
        if (better) {
          best_a = a;
          best_b = b;
          best_ap = ap;
        }
      }
    spec.per_prime.push_back(
        BiasSpec::PerPrime{p, best_a, best_b, (double)best_ap / std::sqrt((double)p)});
    pap.push_back({p, best_ap});
  });

  // CRT in increasing p: x == a_res (mod p) for all chosen primes
  bigint M = 1, A = 0, B = 0;
  double logq = 0;
  for (const auto& pp : spec.per_prime) {
    const long long p = pp.p;
    const long long minv = detail::inv_mod(bigint(M % p).convert_to<long long>(), p);
    auto lift = [&](bigint& acc, long long target) {
      const long long cur = bigint(acc % p).convert_to<long long>();
      const long long k = ((target - cur) % p + p) % p * minv % p;
      acc += M * k;
    };
    lift(A, pp.a_res);
    lift(B, pp.b_res);
    M *= p;
    logq += std::log((double)p);
  }
  spec.q_n = M;
  spec.a0n = A;
  spec.b0n = B;
  spec.e_value = e_for_primes(pap);
  spec.growth_ratio = std::abs(spec.e_value) / std::sqrt(logq);
  return spec;
}

}  // namespace elld
