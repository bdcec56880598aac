#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <elld/families.hpp>

using namespace elld;

namespace {

// unit box weight on [1,2]^2 for enumeration tests (mass irrelevant there)
WeightFunction box_weight() {
  WeightFunction w;
  w.eval = [](double, double) { return 1.0; };
  w.x_lo = w.y_lo = 1.0;
  w.x_hi = w.y_hi = 2.0;
  w.mass = 1.0;
  return w;
}

ScaledFamily manual_scaled(FamilyParams params, double A, double B, WeightFunction w) {
  return ScaledFamily{params, A * A * A, A, B, std::move(w)};
}

// deterministic pool of admissible curves with coordinates in [-999, 999]
std::vector<Curve> random_admissible(FamilyId fam, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long long> d(-250, 249);
  std::vector<Curve> out;
  while ((int)out.size() < n) {
    long long a, b;
    if (fam == FamilyId::f1) {
      a = 2 * d(rng) + 1;
      b = 2 * d(rng) + 1;
    } else {
      a = 4 * d(rng) + 1;
      b = 4 * d(rng) + 1;
    }
    if (std::gcd(a, b) != 1) continue;
    out.push_back(Curve{a, b});
  }
  return out;
}

}  // namespace

TEST_CASE("validate_and_residues: CRT residues and admissibility", "[families]") {
  auto p1 = validate_and_residues(FamilyId::f1, 1, 1, 1);
  CHECK(p1.r == 1);
  CHECK(p1.t == 1);
  CHECK(p1.modulus() == 2);

  auto p2 = validate_and_residues(FamilyId::f1, 3, 1, 2);
  CHECK(p2.r == 1);  // r == 1 (mod 3), r == 1 (mod 2)
  CHECK(p2.t == 5);  // t == 2 (mod 3), t == 1 (mod 2)
  CHECK(p2.modulus() == 6);

  auto p3 = validate_and_residues(FamilyId::f2, 5, 2, 3);  // b0(a0^2+b0) = 21, coprime to 5
  CHECK(p3.modulus() == 20);
  CHECK(p3.r % 5 == 2);
  CHECK(p3.r % 4 == 1);
  CHECK(p3.t % 5 == 3);
  CHECK(p3.t % 4 == 1);
  CHECK(p3.r >= 0);
  CHECK(p3.r < 20);

  // F1 q=3, a0=b0=1: a0 + 2 b0 = 3 is the obstruction
  try {
    validate_and_residues(FamilyId::f1, 3, 1, 1);
    FAIL("expected admissibility_error");
  } catch (const admissibility_error& e) {
    CHECK(e.offending_prime == 3);
  }

  // smallest offending prime reported: q = 15, 3 | a0 while 5 | (a0+2b0)
  try {
    validate_and_residues(FamilyId::f1, 15, 3, 1);
    FAIL("expected admissibility_error");
  } catch (const admissibility_error& e) {
    CHECK(e.offending_prime == 3);
  }

  // F2 q=3, b0(a0^2+b0) = 2*3
  try {
    validate_and_residues(FamilyId::f2, 3, 1, 2);
    FAIL("expected admissibility_error");
  } catch (const admissibility_error& e) {
    CHECK(e.offending_prime == 3);
  }

  CHECK_THROWS_AS(validate_and_residues(FamilyId::f1, 4, 1, 1), domain_error);
  CHECK_THROWS_AS(validate_and_residues(FamilyId::f1, -3, 1, 1), domain_error);
  CHECK_THROWS_AS(validate_and_residues(FamilyId::f1, 0, 1, 1), domain_error);
}

TEST_CASE("traits and scaling", "[families]") {
  CHECK(traits(FamilyId::f1).delta == 3);
  CHECK(traits(FamilyId::f2).delta == 2);
  CHECK(traits(FamilyId::f1).two_exponent == 1);
  CHECK(traits(FamilyId::f2).two_exponent == 2);
  CHECK(traits(FamilyId::f1).support_bound == Catch::Approx(2.0 / 3.0));
  CHECK(traits(FamilyId::f2).support_bound == Catch::Approx(0.5));

  auto params = validate_and_residues(FamilyId::f1, 1, 1, 1);
  auto s = make_scaled(params, 1e6, default_weight());
  CHECK(s.A == Catch::Approx(100.0).epsilon(1e-12));
  CHECK(s.B == Catch::Approx(100.0).epsilon(1e-12));

  auto params2 = validate_and_residues(FamilyId::f2, 1, 1, 1);
  auto s2 = make_scaled(params2, 1e8, default_weight());
  CHECK(s2.A == Catch::Approx(100.0).epsilon(1e-12));
  CHECK(s2.B == Catch::Approx(1e4).epsilon(1e-12));

  CHECK_THROWS_AS(make_scaled(params, 99.0, default_weight()), domain_error);
}

TEST_CASE("enumerate matches a naive double loop and emits each pair once", "[families]") {
  auto params = validate_and_residues(FamilyId::f1, 1, 1, 1);
  auto s = manual_scaled(params, 200.0, 200.0, box_weight());

  std::vector<std::pair<long long, long long>> stream;
  enumerate(s, [&](Curve c, double w) {
    CHECK(w == 1.0);
    stream.push_back({c.a, c.b});
  });

  std::vector<std::pair<long long, long long>> naive;
  for (long long a = 200; a <= 400; ++a)
    for (long long b = 200; b <= 400; ++b)
      if (a % 2 == 1 && b % 2 == 1 && std::gcd(a, b) == 1) naive.push_back({a, b});

  REQUIRE(stream.size() == naive.size());
  CHECK(stream == naive);  // identical content in identical (a, then b) order
  CHECK(std::set<std::pair<long long, long long>>(stream.begin(), stream.end()).size() == stream.size());
}

TEST_CASE("enumerate respects residue classes", "[families]") {
  // F1, q = 3, a0 = 1, b0 = 2: a == 1 (mod 6), b == 5 (mod 6)
  auto p6 = validate_and_residues(FamilyId::f1, 3, 1, 2);
  auto s6 = manual_scaled(p6, 150.0, 150.0, box_weight());
  long long seen = 0;
  enumerate(s6, [&](Curve c, double) {
    CHECK(c.a % 6 == 1);
    CHECK(c.b % 6 == 5);
    CHECK(std::gcd(c.a, c.b) == 1);
    ++seen;
  });
  CHECK(seen > 100);

  // F2 stream contains only a == b == 1 (mod 4)
  auto pf2 = validate_and_residues(FamilyId::f2, 1, 1, 1);
  ScaledFamily sf2{pf2, 1e4, 10.0, 100.0, box_weight()};
  seen = 0;
  enumerate(sf2, [&](Curve c, double) {
    CHECK(c.a % 4 == 1);
    CHECK(c.b % 4 == 1);
    ++seen;
  });
  CHECK(seen == 47);  // a in {13,17}, b == 1 (mod 4) in [100,200], minus 3 gcd hits
}

TEST_CASE("enumerate weights follow the smooth bump", "[families]") {
  auto params = validate_and_residues(FamilyId::f1, 1, 1, 1);
  auto s = make_scaled(params, 1e6, default_weight());
  long long count = 0;
  double max_w = 0;
  enumerate(s, [&](Curve c, double w) {
    CHECK(w >= 0.0);
    CHECK(w == s.weight.eval(c.a / s.A, c.b / s.B));
    max_w = std::max(max_w, w);
    ++count;
  });
  CHECK(count > 1000);
  CHECK(max_w > 1.0);  // normalized bump peaks above its mean height
}

TEST_CASE("conductor closed form and 128-bit safety", "[families]") {
  CHECK((long long)conductor(FamilyId::f1, Curve{1, 1}) == 96);
  CHECK((long long)conductor(FamilyId::f1, Curve{3, 5}) == 6240);
  CHECK((long long)conductor(FamilyId::f2, Curve{1, 5}) == 1920);

  CHECK_THROWS_AS(conductor(FamilyId::f1, Curve{2, 1}), domain_error);   // even a
  CHECK_THROWS_AS(conductor(FamilyId::f1, Curve{3, 9}), domain_error);   // gcd 3
  CHECK_THROWS_AS(conductor(FamilyId::f2, Curve{3, 1}), domain_error);   // a != 1 mod 4

  RadicalTable table(2000);
  for (Curve c : random_admissible(FamilyId::f1, 50, 7)) {
    CHECK(conductor(FamilyId::f1, c, &table) == conductor(FamilyId::f1, c));
  }
  for (Curve c : random_admissible(FamilyId::f2, 50, 8)) {
    CHECK(conductor(FamilyId::f2, c, &table) == conductor(FamilyId::f2, c));
  }

  // near the X = 10^12 window: a, b ~ 10^4 (F1), so a+2b products stay in range
  Curve big{99999, 99997};
  i128 n = conductor(FamilyId::f1, big);
  CHECK(n > 0);
  CHECK(n % 32 == 0);
}

TEST_CASE("reduction type at odd primes", "[families]") {
  CHECK(reduction_type(FamilyId::f1, Curve{1, 1}, 3) == Reduction::multiplicative);
  CHECK(reduction_type(FamilyId::f1, Curve{1, 1}, 5) == Reduction::good);
  CHECK(reduction_type(FamilyId::f2, Curve{1, 1}, 3) == Reduction::good);
  CHECK_THROWS_AS(reduction_type(FamilyId::f1, Curve{1, 1}, 2), domain_error);

  // p | N iff multiplicative, for a sample of curves and primes
  for (Curve c : random_admissible(FamilyId::f1, 25, 11)) {
    i128 n = conductor(FamilyId::f1, c);
    for (long long p : {3LL, 5LL, 7LL, 11LL, 13LL, 17LL, 19LL, 23LL, 29LL, 31LL}) {
      bool divides = (n % p == 0);
      CHECK((reduction_type(FamilyId::f1, c, p) == Reduction::multiplicative) == divides);
      CHECK(divides_conductor(FamilyId::f1, c, p) == divides);
    }
  }
  for (Curve c : random_admissible(FamilyId::f2, 25, 12)) {
    i128 n = conductor(FamilyId::f2, c);
    for (long long p : {3LL, 5LL, 7LL, 11LL, 13LL, 17LL, 19LL, 23LL, 29LL, 31LL}) {
      bool divides = (n % p == 0);
      CHECK((reduction_type(FamilyId::f2, c, p) == Reduction::multiplicative) == divides);
      CHECK(divides_conductor(FamilyId::f2, c, p) == divides);
    }
  }
}

TEST_CASE("lambda_p character-sum values", "[families]") {
  CHECK(lambda_p(FamilyId::f1, Curve{1, 1}, 2) == 0.0);
  CHECK(lambda_p(FamilyId::f2, Curve{1, 1}, 2) == 0.0);
  CHECK(lambda_p(FamilyId::f1, Curve{1, 1}, 5) == Catch::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-15));
  CHECK(lambda_p(FamilyId::f1, Curve{1, 3}, 5) == Catch::Approx(-2.0 / std::sqrt(5.0)).epsilon(1e-15));

  // multiplicative instance: F1 (1,1) at p = 3, the sum gives +1 (not the
  // closed table's -1; see the lemma-table cross-check below)
  CHECK(ap_charsum(FamilyId::f1, 1, 1, 3) == 1);

  CHECK_THROWS_AS(ap_charsum(FamilyId::f1, 1, 1, 4), domain_error);
}

TEST_CASE("lambda at prime powers: recurrence and bad primes", "[families]") {
  CHECK(lambda_prime_power(FamilyId::f1, Curve{17, 29}, 7, 0) == 1.0);
  CHECK(lambda_prime_power(FamilyId::f1, Curve{1, 1}, 2, 5) == 0.0);
  CHECK(lambda_prime_power(FamilyId::f1, Curve{1, 3}, 5, 2) == Catch::Approx(-1.0 / 5.0).epsilon(1e-14));
  CHECK(lambda_prime_power(FamilyId::f1, Curve{1, 1}, 3, 2) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(lambda_prime_power(FamilyId::f1, Curve{1, 1}, 3, -1), domain_error);

  // Hecke relation lambda(p) lambda(p^v) = lambda(p^{v+1}) + lambda(p^{v-1}) at good p
  for (Curve c : random_admissible(FamilyId::f1, 10, 21)) {
    for (long long p : {5LL, 7LL, 11LL}) {
      if (divides_conductor(FamilyId::f1, c, p)) continue;
      for (int v = 1; v <= 6; ++v) {
        double lhs = lambda_p(FamilyId::f1, c, p) * lambda_prime_power(FamilyId::f1, c, p, v);
        double rhs = lambda_prime_power(FamilyId::f1, c, p, v + 1) +
                     lambda_prime_power(FamilyId::f1, c, p, v - 1);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-11));
      }
    }
  }

  // bad p: lambda(p^v) = lambda(p)^v
  for (Curve c : {Curve{1, 1}, Curve{3, 1}, Curve{1, 7}}) {
    for (long long p : {3LL, 5LL, 7LL, 11LL}) {
      if (!divides_conductor(FamilyId::f1, c, p)) continue;
      double l1 = lambda_p(FamilyId::f1, c, p);
      for (int v = 1; v <= 5; ++v)
        CHECK(lambda_prime_power(FamilyId::f1, c, p, v) ==
              Catch::Approx(std::pow(l1, v)).margin(1e-13));
    }
  }
}

TEST_CASE("Hasse bound, integrality, and point-count cross-check", "[families]") {
  for (FamilyId fam : {FamilyId::f1, FamilyId::f2}) {
    auto curves = random_admissible(fam, 200, fam == FamilyId::f1 ? 101 : 102);
    for_primes(98, [&](std::uint64_t pu) {
      long long p = (long long)pu;
      if (p == 2) return;
      auto chi = chi_table(p);
      for (Curve c : curves) {
        long long ap = ap_charsum(fam, c.a, c.b, p, chi.data());
        if (divides_conductor(fam, c, p)) {
          CHECK((ap == 1 || ap == -1));  // multiplicative: lambda sqrt(p) = +-1
        } else {
          CHECK((double)ap * ap <= 4.0 * p);  // Hasse
        }
        if (p <= 31) {
          long long ns = count_nonsingular_points(fam, c, p);
          long long expected = divides_conductor(fam, c, p) ? p - ns : p + 1 - ns;
          CHECK(ap == expected);
        }
      }
    });
  }
}

TEST_CASE("scaling covariance of a_p", "[families]") {
  // F1: a_p(ea, eb) = (e|p) a_p(a, b); F2: a_p(ea, e^2 b) = (e|p) a_p(a, b)
  for_primes(14, [&](std::uint64_t pu) {
    long long p = (long long)pu;
    if (p == 2) return;
    auto chi = chi_table(p);
    for (long long a = 0; a < p; ++a) {
      for (long long b = 0; b < p; ++b) {
        long long base1 = ap_charsum(FamilyId::f1, a, b, p, chi.data());
        long long base2 = ap_charsum(FamilyId::f2, a, b, p, chi.data());
        for (long long e = 1; e < p; ++e) {
          int ce = chi[(size_t)e];
          CHECK(ap_charsum(FamilyId::f1, e * a % p, e * b % p, p, chi.data()) == ce * base1);
          CHECK(ap_charsum(FamilyId::f2, e * a % p, e * e % p * b % p, p, chi.data()) == ce * base2);
        }
      }
    }
  });
}

TEST_CASE("lemma table cross-check isolates the stated discrepancy", "[families]") {
  auto rep1 = lemma_table_cross_check(FamilyId::f1, 60);
  CHECK(rep1.any_mismatch);
  for (const auto& row : rep1.rows) {
    CHECK(row.agree + row.mismatch == row.p - 1);  // each case has p-1 residue classes
    if (row.case_label == "p|(a+2b)" && row.p_mod_4 == 3) {
      // (2b|p) = (-a|p) = -(a|p) while the sum gives (a|p): every class flips
      CHECK(row.mismatch == row.p - 1);
      CHECK(row.agree == 0);
    } else {
      CHECK(row.mismatch == 0);
    }
  }

  auto rep2 = lemma_table_cross_check(FamilyId::f2, 60);
  CHECK_FALSE(rep2.any_mismatch);
  for (const auto& row : rep2.rows) CHECK(row.agree + row.mismatch == row.p - 1);
}
