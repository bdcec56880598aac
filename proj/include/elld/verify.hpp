#pragma once

// Convergence diagnostics: asymptotic predictions about the enumerated
// families (size, divisibility densities, mean log conductor, mean log
// radical) checked against direct weighted counts on an X-grid.  Each check
// returns rows rather than a verdict so callers can print the table and pin
// their own tolerances.

#include <cmath>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "families.hpp"
#include "numeric.hpp"
#include "primes.hpp"
#include "rational.hpp"
#include "weights.hpp"

namespace elld {

struct ConvergenceRow {
  double X = 0;
  double observed = 0;
  double predicted = 0;
  double ratio = 0;            // observed / predicted
  double residual_scaled = 0;  // (observed - predicted) * log X
  bool out_of_range = false;   // asymptotic regime not reached at this X
};

namespace detail {

inline void check_grid(const std::vector<double>& X_grid) {
  if (X_grid.size() < 2) throw domain_error("verify: X grid needs at least two points");
  for (size_t i = 0; i + 1 < X_grid.size(); ++i)
    if (!(X_grid[i] < X_grid[i + 1])) throw domain_error("verify: X grid must be ascending");
}

// gamma(q^2) = (1/q^2) prod_{p|q} p^2/(p^2-1), built from the factorization
// of q so q^2 never has to fit in 64 bits
inline bigrat gamma_q_squared(long long q) {
  bigrat r(1, bigint(q) * q);
  for (auto& [p, e] : factorize(q)) {
    const bigint p2 = bigint(p) * p;
    r *= bigrat(p2, p2 - 1);
  }
  return r;
}

}  // namespace detail

// W_X -> A B gamma(q^2) mass / (3 zeta(2))  [first family; 12 zeta(2) for the
// second: the extra factor 4 is the mod-4 congruence on both coordinates]
inline std::vector<ConvergenceRow> family_size_check(const FamilyParams& params,
                                                     const WeightFunction& weight,
                                                     const std::vector<double>& X_grid) {
  detail::check_grid(X_grid);
  const double zeta2 = M_PI * M_PI / 6.0;
  const double denom = (params.family == FamilyId::f1 ? 3.0 : 12.0) * zeta2;
  const double gq2 = rat_double(detail::gamma_q_squared(params.q));
  std::vector<ConvergenceRow> rows;
  for (double X : X_grid) {
    ScaledFamily s = make_scaled(params, X, weight);
    kahan_sum w_acc;
    enumerate(s, [&](Curve, double w) { w_acc.add(w); });
    ConvergenceRow row;
    row.X = X;
    row.observed = (double)w_acc.value();
    row.predicted = s.A * s.B * gq2 * weight.mass / denom;
    row.ratio = row.observed / row.predicted;
    row.residual_scaled = (row.observed - row.predicted) * std::log(X);
    rows.push_back(row);
  }
  return rows;
}

// weighted density of p | a -> 1/(p+1): the naive 1/p times p/(p+1) from
// conditioning on gcd(a,b) = 1
inline ConvergenceRow p_divides_density_check(const FamilyParams& params,
                                              const WeightFunction& weight, double X,
                                              long long p) {
  bool prime = p >= 2;
  for (long long d = 2; d * d <= p && prime; ++d)
    if (p % d == 0) prime = false;
  if (!prime) throw domain_error("p_divides_density_check: p must be prime");
  if (p == 2 || params.q % p == 0)
    throw domain_error("p_divides_density_check: p | 2q never divides a member's a");
  ScaledFamily s = make_scaled(params, X, weight);
  kahan_sum w_acc, hit_acc;
  enumerate(s, [&](Curve c, double w) {
    w_acc.add(w);
    if (c.a % p == 0) hit_acc.add(w);
  });
  ConvergenceRow row;
  row.X = X;
  row.observed = (double)(hit_acc.value() / w_acc.value());
  row.predicted = 1.0 / (double)(p + 1);
  row.ratio = row.observed / row.predicted;
  row.residual_scaled = (row.observed - row.predicted) * std::log(X);
  // with fewer than ~p multiples of p across the a-window the density has not
  // formed yet
  row.out_of_range = (double)p * p > s.A * (weight.x_hi - weight.x_lo);
  return row;
}

namespace detail {

// c1 alone (no r-integral): the log-conductor and log-radical rows only need
// the archimedean block and the p^2 - 1 prime sum
inline double c1_only(FamilyId fam, const WeightFunction& weight, const TruncationParams& trunc) {
  trunc.validate();
  const PrimeSieve ps = sieve((std::uint64_t)trunc.P);
  const double prime_sum =
      odd_prime_sum(ps, [](long long p) { return std::log((double)p) / ((double)p * p - 1.0); });
  const double arch = weight_integral(
      weight, [&](double x, double y) { return log_integrand(fam, x, y); }, trunc.quad_tol);
  return arch - traits(fam).delta * prime_sum;
}

}  // namespace detail

// E[log N / log X] -> 1 + (d1 + c1)/log X, residual shrinking like 1/log X
inline std::vector<ConvergenceRow> avg_log_conductor_check(const FamilyParams& params,
                                                           const WeightFunction& weight,
                                                           const std::vector<double>& X_grid,
                                                           const TruncationParams& trunc = {}) {
  detail::check_grid(X_grid);
  const double c1 = detail::c1_only(params.family, weight, trunc);
  const double d1 = d_constants(params.family, params.q, trunc).d[1];
  std::vector<ConvergenceRow> rows;
  for (double X : X_grid) {
    ScaledFamily s = make_scaled(params, X, weight);
    const double need = params.family == FamilyId::f1
                            ? s.A * weight.x_hi + 2.0 * s.B * weight.y_hi + 2.0
                            : s.A * weight.x_hi * s.A * weight.x_hi + s.B * weight.y_hi + 2.0;
    const RadicalTable rtab((std::uint32_t)std::min(need, 3.2e7));
    kahan_sum w_acc, ln_acc;
    enumerate(s, [&](Curve c, double w) {
      w_acc.add(w);
      ln_acc.add(w * (double)std::log((long double)conductor(params.family, c, &rtab)));
    });
    const double L = std::log(X);
    ConvergenceRow row;
    row.X = X;
    row.observed = (double)(ln_acc.value() / w_acc.value()) / L;
    row.predicted = 1.0 + (d1 + c1) / L;
    row.ratio = row.observed / row.predicted;
    row.residual_scaled = (row.observed - row.predicted) * L;
    rows.push_back(row);
  }
  return rows;
}

// E[log rad(a)] -> log A + Int log(x) w - sum_{p !| 2q} log p/(p^2-1)
// (first family; the second family's squarefree coordinate is b, with log B
// and log(y) in its place).  The prime sum is the v_p >= 2 surplus under the
// gcd condition: sum_{k>=2} p^{-k} (p/(p+1)) = 1/(p^2-1).
inline ConvergenceRow avg_log_radical_check(const FamilyParams& params,
                                            const WeightFunction& weight, double X,
                                            const TruncationParams& trunc = {}) {
  trunc.validate();
  ScaledFamily s = make_scaled(params, X, weight);
  const bool on_a = params.family == FamilyId::f1;
  const PrimeSieve ps = sieve((std::uint64_t)trunc.P);
  double prime_sum = detail::odd_prime_sum(
      ps, [](long long p) { return std::log((double)p) / ((double)p * p - 1.0); });
  for (long long p : detail::sorted_odd_prime_divisors(std::max(params.q, 1LL)))
    prime_sum -= std::log((double)p) / ((double)p * p - 1.0);
  const double arch = weight_integral(
      weight, [&](double x, double y) { return std::log(on_a ? x : y); }, trunc.quad_tol);

  const double coord_scale = on_a ? s.A : s.B;
  RadicalTable rtab((std::uint32_t)(coord_scale * (on_a ? weight.x_hi : weight.y_hi) + 2.0));
  kahan_sum w_acc, lr_acc;
  enumerate(s, [&](Curve c, double w) {
    w_acc.add(w);
    lr_acc.add(w * std::log((double)rtab((std::uint32_t)std::llabs(on_a ? c.a : c.b))));
  });
  ConvergenceRow row;
  row.X = X;
  row.observed = (double)(lr_acc.value() / w_acc.value());
  row.predicted = std::log(coord_scale) + arch - prime_sum;
  row.ratio = row.observed / row.predicted;
  row.residual_scaled = row.observed - row.predicted;  // o(1) row: unscaled gap
  return row;
}

}  // namespace elld
