#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <elld/constants.hpp>

using namespace elld;

namespace {

TruncationParams fast_trunc() {
  TruncationParams t;
  t.P = 100'000;
  t.P_Q = 200;
  t.L_max = 5;
  t.T = 10'000;
  return t;
}

std::vector<long long> odd_primes_upto(long long n) {
  std::vector<long long> ps;
  for_primes((std::uint64_t)n, [&](std::uint64_t p) {
    if (p > 2) ps.push_back((long long)p);
  });
  return ps;
}

}  // namespace

TEST_CASE("truncation parameter validation", "[constants]") {
  TruncationParams t;
  CHECK_NOTHROW(t.validate());
  t.P = 99;
  CHECK_THROWS_AS(t.validate(), domain_error);
  t = {};
  t.L_max = 1;
  CHECK_THROWS_AS(t.validate(), domain_error);
  t = {};
  t.T = 9999;
  CHECK_THROWS_AS(t.validate(), domain_error);
  t = {};
  t.quad_tol = 0.0;
  CHECK_THROWS_AS(t.validate(), domain_error);
}

TEST_CASE("c constants against reference digits", "[constants]") {
  auto rep1 = c_constants(FamilyId::f1, default_weight());
  auto rep2 = c_constants(FamilyId::f2, default_weight());

  // c2 closed form, family-independent
  CHECK(rep1.c[2] == Catch::Approx(-4.8301854626).margin(1e-7));
  CHECK(rep1.c[2] == rep2.c[2]);
  CHECK(rep1.c[2] == Catch::Approx(-2.0 * std::log(2.0 * M_PI) - 2.0 * kEulerGamma).margin(1e-15));

  // c1: quadrature plus prime sum (delta-scaled), default bump weight
  CHECK(rep1.c[1] == Catch::Approx(4.74116444710537).margin(1e-8));
  CHECK(rep2.c[1] == Catch::Approx(5.19584086111377).margin(1e-8));

  // c3, c6 carry the exact 3:2 delta ratio between the families
  CHECK(rep1.c[3] == Catch::Approx(-0.3309763077).margin(2e-6));
  CHECK(rep2.c[3] == Catch::Approx(-0.2206508718).margin(2e-6));
  CHECK(rep1.c[3] == Catch::Approx(1.5 * rep2.c[3]).margin(1e-14));
  CHECK(rep1.c[6] == Catch::Approx(0.2426660895).margin(1e-7));
  CHECK(rep2.c[6] == Catch::Approx(0.1617773930).margin(1e-7));
  CHECK(rep1.c[6] == Catch::Approx(1.5 * rep2.c[6]).margin(1e-14));

  // c4 at T = 10^8; the R-integral converges conditionally, so millis-scale
  // oscillation remains
  CHECK(rep1.c[4] == Catch::Approx(-5.6656429).margin(5e-3));
  CHECK(rep2.c[4] == Catch::Approx(-5.1275794).margin(5e-3));

  // c5 via the closed local-factor form at P_Q = 2000
  CHECK(rep1.c[5] == Catch::Approx(-0.0169118).margin(1e-4));
  CHECK(rep2.c[5] == Catch::Approx(-0.0006139).margin(1e-4));

  for (auto& [k, v] : rep1.tails) CHECK(v >= 0.0);

  // the four-constant sums; the published figures are exactly 2.000 higher,
  // an R-integral bookkeeping slip documented with the acceptance suite
  const double sum1 = rep1.c[3] + rep1.c[4] + rep1.c[5] + rep1.c[6];
  const double sum2 = rep2.c[3] + rep2.c[4] + rep2.c[5] + rep2.c[6];
  CHECK(sum1 == Catch::Approx(-5.7708649).margin(5e-3));
  CHECK(sum2 == Catch::Approx(-5.1870668).margin(5e-3));
  CHECK(sum1 + 2.0 == Catch::Approx(-3.77087).margin(5e-3));
  CHECK(sum2 + 2.0 == Catch::Approx(-3.18707).margin(5e-3));
}

TEST_CASE("c5 closed form agrees with its Q-series", "[constants]") {
  // The closed local-factor form sums the l-series exactly; the truncated
  // Q-series must approach it as L_max grows.  The L_max = 5 gap is dominated
  // by the p = 3, l = 6 term (~5e-4), which is why the closed form is primary.
  TruncationParams t = fast_trunc();
  t.P_Q = 500;
  for (FamilyId fam : {FamilyId::f1, FamilyId::f2}) {
    auto rep = c_constants(fam, default_weight(), t);
    double prev = 1e9;
    for (int L : {4, 5, 6}) {
      const double gap = std::abs(rep.c[5] - c5_q_series(fam, 500, L));
      CHECK(gap < prev);
      if (L == 5) CHECK(gap <= 1e-3);
      if (L == 6) CHECK(gap <= 2e-4);
      prev = gap;
    }
  }
}

TEST_CASE("tail fields dominate the P-dependence", "[constants]") {
  TruncationParams lo = fast_trunc(), hi = fast_trunc();
  lo.P = 50'000;
  hi.P = 200'000;
  auto rl = c_constants(FamilyId::f1, default_weight(), lo);
  auto rh = c_constants(FamilyId::f1, default_weight(), hi);
  CHECK(std::abs(rl.c[3] - rh.c[3]) < rl.tails.at("c3"));
  CHECK(std::abs(rl.c[6] - rh.c[6]) < rl.tails.at("c6"));
  CHECK(std::abs(rl.c[1] - rh.c[1]) < rl.tails.at("c1_prime_sum"));
}

TEST_CASE("d constants: exact finite sums over p | q", "[constants]") {
  auto r1 = d_constants(FamilyId::f1, 1);
  for (int i = 1; i <= 6; ++i) CHECK(r1.d[i] == 0.0);
  CHECK(r1.d2_flagged);

  const double log3 = std::log(3.0);
  auto r3 = d_constants(FamilyId::f1, 3);
  CHECK(r3.d[1] == Catch::Approx(3.0 * log3 / 8.0).margin(1e-15));
  CHECK(r3.d[2] == 0.0);
  CHECK(r3.d[3] == Catch::Approx(6.0 * log3 / 32.0).margin(1e-15));
  CHECK(r3.d[4] == Catch::Approx(6.0 * log3 / 12.0).margin(1e-15));
  CHECK(r3.d[5] == Catch::Approx(2.0 * (log3 / 12.0) * 0.25).margin(1e-15));  // lfs(F1,3) = 1/4
  CHECK(r3.d[6] == Catch::Approx(-6.0 * log3 / 48.0).margin(1e-15));
  CHECK(r3.d[1] == Catch::Approx(0.411985).margin(1e-5));  // displayed digits round 0.4119796
  CHECK(r3.d[5] == Catch::Approx(0.0457755).margin(1e-6));

  // multiplicativity over the squarefree support: q = 15 = 3 * 5
  auto r5 = d_constants(FamilyId::f1, 5);
  auto r15 = d_constants(FamilyId::f1, 15);
  for (int i = 1; i <= 6; ++i) CHECK(r15.d[i] == Catch::Approx(r3.d[i] + r5.d[i]).margin(1e-15));

  // prime powers contribute once: d(q) depends only on rad(q)
  auto r9 = d_constants(FamilyId::f1, 9);
  for (int i = 1; i <= 6; ++i) CHECK(r9.d[i] == r3.d[i]);

  CHECK_THROWS_AS(d_constants(FamilyId::f1, 6), domain_error);
  CHECK_THROWS_AS(d_constants(FamilyId::f1, -3), domain_error);
}

TEST_CASE("d(q_n) approaches the negated c prime sums", "[constants]") {
  auto c1 = c_constants(FamilyId::f1, default_weight(), fast_trunc());
  double prev3 = 1e9, prev4 = 1e9, prev6 = 1e9;
  for (long long n : {20LL, 50LL, 100LL}) {
    auto d = d_constants_for_primes(FamilyId::f1, odd_primes_upto(n), fast_trunc());
    const double gap3 = std::abs(d.d[3] - (-c1.c[3]));
    const double gap4 = std::abs(d.d[4] - (2.0 * 3.0 * 0.2690303454));  // 2 delta S
    const double gap6 = std::abs(d.d[6] - (-c1.c[6]));
    CHECK(gap3 < prev3);
    CHECK(gap4 < prev4);
    CHECK(gap6 < prev6);
    prev3 = gap3;
    prev4 = gap4;
    prev6 = gap6;
    if (n == 20) {
      CHECK(d.d[3] == Catch::Approx(0.3257219).margin(1e-6));
      CHECK(d.d[4] == Catch::Approx(1.375282).margin(1e-5));
    }
    if (n == 100) CHECK(d.d[3] == Catch::Approx(0.3306726).margin(1e-6));
  }
  CHECK(prev3 < 5e-4);
}

TEST_CASE("e constant at residue representatives", "[constants]") {
  CHECK(e_constant(FamilyId::f1, 1, 1, 1) == 0.0);
  CHECK(e_constant(FamilyId::f2, 1, 1, 1) == 0.0);

  // q = 3: lambda_{1,2}(3) = 0, so the local factor is (4/3)^{-1} - 1 = -1/4
  // and e = -2 log3 (2/3)(-1/4) = log3/3
  CHECK(e_constant(FamilyId::f1, 3, 1, 2) == Catch::Approx(std::log(3.0) / 3.0).margin(1e-14));
  CHECK(e_constant(FamilyId::f1, 3, 1, 2) == Catch::Approx(0.3662040962227033).margin(1e-12));

  // both admissible classes mod 3 have a_p = 0, hence identical e
  CHECK(e_constant(FamilyId::f1, 3, 1, 2) == e_constant(FamilyId::f1, 3, 2, 1));

  CHECK_THROWS_AS(e_constant(FamilyId::f1, 3, 1, 1), admissibility_error);

  // e_for_primes matches e_constant on a composite modulus (2*3*(2+2*3) = 48
  // is coprime to 35)
  auto params = validate_and_residues(FamilyId::f1, 35, 2, 3);
  std::vector<std::pair<long long, long long>> pap;
  for (long long p : {5LL, 7LL}) pap.push_back({p, ap_charsum(FamilyId::f1, params.a0, params.b0, p)});
  CHECK(e_constant(FamilyId::f1, 35, 2, 3) == e_for_primes(pap));
}

TEST_CASE("predicted density assembly", "[constants]") {
  auto t = fast_trunc();
  auto params = validate_and_residues(FamilyId::f1, 3, 1, 2);
  auto s = make_scaled(params, 1e9, default_weight());
  auto test = make_test_function(TestKind::fejer, 0.2);

  auto crep = c_constants(FamilyId::f1, s.weight, t);
  auto drep = d_constants(FamilyId::f1, 3, t);
  const double e = e_constant(FamilyId::f1, 3, 1, 2);
  const double expected =
      0.5 * test.phi0 + test.phihat0 + test.phihat0 / std::log(1e9) * (e + drep.d_sum() + crep.c_sum());
  CHECK(predicted_density(s, test, t) == Catch::Approx(expected).margin(1e-13));

  // q = 1: only the c-block contributes
  auto p1 = validate_and_residues(FamilyId::f1, 1, 1, 1);
  auto s1 = make_scaled(p1, 1e9, default_weight());
  const double base = predicted_density(s1, test, t);
  CHECK(base == Catch::Approx(0.5 * 0.2 + 1.0 + crep.c_sum() / std::log(1e9)).margin(1e-13));

  // prediction is linear in the bias block: the q = 3 offset is (e + sum d)/log X
  CHECK(predicted_density(s, test, t) - base ==
        Catch::Approx((e + drep.d_sum()) / std::log(1e9)).margin(1e-13));

  // support hypothesis: F2 needs rho < 1/2
  auto p2 = validate_and_residues(FamilyId::f2, 1, 1, 1);
  auto s2 = make_scaled(p2, 1e9, default_weight());
  CHECK_THROWS_AS(predicted_density(s2, make_test_function(TestKind::fejer, 0.55), t), domain_error);
  CHECK_NOTHROW(predicted_density(s2, make_test_function(TestKind::fejer, 0.45), t));
}
