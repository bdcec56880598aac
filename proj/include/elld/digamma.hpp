#pragma once
#include <cmath>
#include <complex>

#include "errors.hpp"

namespace elld {

// Complex digamma via recurrence shift to |z| >= 10 followed by the Stirling
// asymptotic with 6 Bernoulli terms; absolute error <= 1e-10 on Re z > 0
// (first omitted term B_14/(14 |z|^14) ~ 8e-16 at |z| = 10).
inline std::complex<double> digamma(std::complex<double> z) {
  if (z.real() <= 0.0 && z.imag() == 0.0 && z.real() == std::floor(z.real()))
    throw domain_error("digamma: pole at nonpositive integer");
  std::complex<double> acc(0.0, 0.0);
  while (std::abs(z) < 10.0) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  std::complex<double> inv = 1.0 / z, inv2 = inv * inv;
  static const double b2n_over_2n[6] = {
      1.0 / 12.0,    // B2/2 = (1/6)/2
      -1.0 / 120.0,  // B4/4
      1.0 / 252.0,   // B6/6
      -1.0 / 240.0,  // B8/8
      1.0 / 132.0,   // B10/10
      -691.0 / 32760.0,  // B12/12
  };
  std::complex<double> s = std::log(z) - 0.5 * inv;
  std::complex<double> zp = inv2;
  for (int n = 0; n < 6; ++n) {
    s -= b2n_over_2n[n] * zp;
    zp *= inv2;
  }
  return s + acc;
}

// Re psi(1 + i y), the gamma-factor integrand of the explicit formula; even in y
inline double re_digamma_1i(double y) {
  return digamma(std::complex<double>(1.0, y)).real();
}

}  // namespace elld
