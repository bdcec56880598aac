#pragma once
#include <cmath>

#include "errors.hpp"

namespace elld {

enum class TestKind { fejer, cosine_sq };

inline const char* kind_name(TestKind k) { return k == TestKind::fejer ? "fejer" : "cosine_sq"; }

namespace detail {
// sin(pi u)/(pi u), series for small u
inline double sinc_pi(double u) {
  double v = M_PI * u;
  if (std::abs(v) < 1e-4) {
    double v2 = v * v;
    return 1.0 - v2 / 6.0 * (1.0 - v2 / 20.0);
  }
  return std::sin(v) / v;
}
}  // namespace detail

// Even test function phi with compactly supported phi_hat, both in closed form.
//   fejer:     phi_hat(t) = max(0, 1 - |t|/rho),        phi(x) = rho sinc^2(pi rho x)
//   cosine_sq: phi_hat(t) = cos^2(pi t/(2 rho)) 1_{|t|<rho},
//              phi(x) = rho sinc(pi u)/(1-u^2), u = 2 rho x
// Both normalize phi_hat(0) = 1. phi >= 0 holds for fejer only; the raised
// cosine inverse transform has negative side lobes (|u| > 2).
struct TestFunctionPair {
  TestKind kind;
  double rho;
  double phi0;     // phi(0)
  double phihat0;  // phi_hat(0) = 1

  double phi_hat(double t) const {
    double a = std::abs(t);
    if (a >= rho) return 0.0;
    if (kind == TestKind::fejer) return 1.0 - a / rho;
    double c = std::cos(M_PI * t / (2.0 * rho));
    return c * c;
  }

  double phi(double x) const {
    if (kind == TestKind::fejer) {
      double s = detail::sinc_pi(rho * x);
      return rho * s * s;
    }
    double u = std::abs(2.0 * rho * x);
    if (std::abs(u - 1.0) < 0.5) {
      // exact rewrite at the removable point u = 1: with s = u - 1,
      // sin(pi u) = -sin(pi s) and 1 - u^2 = -s(2+s), so
      // phi = rho sinc(pi s) / ((1+s)(2+s))
      double s = u - 1.0;
      return rho * detail::sinc_pi(s) / ((1.0 + s) * (2.0 + s));
    }
    return rho * detail::sinc_pi(u) / (1.0 - u * u);
  }

  // phi_hat^{(2l)}(0); cosine_sq only (fejer is not differentiable at 0)
  double phihat_deriv_2l_at0(int l) const {
    if (kind != TestKind::cosine_sq)
      throw domain_error("phihat_deriv_2l_at0: fejer kind unsupported");
    if (l < 0) throw domain_error("phihat_deriv_2l_at0: l must be >= 0");
    if (l == 0) return 1.0;
    // cos^2 = (1 + cos(pi t/rho))/2; even derivatives of the cosine term
    double f = 1.0;
    double base = M_PI / rho;
    for (int i = 0; i < 2 * l; ++i) f *= base;
    return 0.5 * ((l % 2 == 0) ? f : -f);
  }
};

// rho must lie in (0, rho_max of the target family); the largest admissible
// support over the two families is 2/3, family-level bounds are enforced by
// the density/constants entry points
inline TestFunctionPair make_test_function(TestKind kind, double rho) {
  if (!(rho > 0.0) || !(rho < 2.0 / 3.0))
    throw domain_error("make_test_function: rho out of range");
  TestFunctionPair t;
  t.kind = kind;
  t.rho = rho;
  t.phi0 = rho;  // both kernels peak at phi(0) = rho
  t.phihat0 = 1.0;
  return t;
}

}  // namespace elld
