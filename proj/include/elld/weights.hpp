#pragma once
#include <cmath>
#include <functional>

#include "quadrature.hpp"

namespace elld {

// smooth bump exp(-1/(1-u^2)) on |u| < 1, identically 0 outside
inline double bump1(double u) {
  double u2 = u * u;
  if (u2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u2));
}

struct WeightFunction {
  std::function<double(double, double)> eval;  // vanishes outside the support box
  double x_lo, x_hi, y_lo, y_hi;
  double mass;  // integral over the box; 1 after normalization (w_hat(0,0) = 1)
};

// Default weight: c * bump1(2x-3) * bump1(2y-3) on [1,2]^2, normalized to
// mass 1 by quadrature. The paper fixes only smoothness/support/positivity.
inline WeightFunction default_weight(double quad_tol = 1e-9) {
  static double c_cached = 0.0;
  if (c_cached == 0.0) {
    double m1 = integrate_adaptive([](double x) { return bump1(2.0 * x - 3.0); }, 1.0, 2.0,
                                   0.1 * quad_tol)
                    .value;
    c_cached = 1.0 / (m1 * m1);  // product structure: 2D mass = m1^2
  }
  double c = c_cached;
  WeightFunction w;
  w.eval = [c](double x, double y) { return c * bump1(2.0 * x - 3.0) * bump1(2.0 * y - 3.0); };
  w.x_lo = 1.0;
  w.x_hi = 2.0;
  w.y_lo = 1.0;
  w.y_hi = 2.0;
  w.mass = 1.0;
  return w;
}

// integral of g against the weight over its support box
template <class G>
inline double weight_integral(const WeightFunction& w, G&& g, double quad_tol = 1e-9) {
  return integrate2d_adaptive(
             [&](double x, double y) { return g(x, y) * w.eval(x, y); }, w.x_lo, w.x_hi,
             w.y_lo, w.y_hi, quad_tol)
      .value;
}

}  // namespace elld
