#pragma once
#include <array>
#include <cmath>
#include <cstddef>

#include "errors.hpp"

namespace elld {

// 15-point Gauss-Legendre rule. Nodes/weights are generated once by Newton
// iteration on P_15 (deterministic to the last bit) instead of transcribed
// tables.
struct GL15 {
  std::array<double, 15> x{}, w{};
  GL15() {
    constexpr int n = 15;
    for (int i = 0; i < n; ++i) {
      double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = xi;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
        double dx = p1 / dp;
        xi -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      // recompute derivative at the converged node for the weight
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      x[i] = xi;
      w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
  }
};

inline const GL15& gl15_rule() {
  static const GL15 r;
  return r;
}

template <class F>
inline double gl15(F&& f, double a, double b) {
  const GL15& r = gl15_rule();
  double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
  for (int i = 0; i < 15; ++i) s += r.w[i] * f(c + h * r.x[i]);
  return s * h;
}

struct QuadResult {
  double value;
  double error_est;
  std::size_t evals;
};

namespace detail {
template <class F>
void adapt1(F& f, double a, double b, double tol, int depth, QuadResult& out) {
  double whole = gl15(f, a, b);
  double m = 0.5 * (a + b);
  double halves = gl15(f, a, m) + gl15(f, m, b);
  out.evals += 45;
  double err = std::abs(halves - whole);
  if (err <= tol || (b - a) < 1e-14 * (std::abs(a) + 1.0)) {
    out.value += halves;
    out.error_est += err;
    return;
  }
  if (depth <= 0) throw numeric_error("integrate_adaptive: tolerance not reached");
  adapt1(f, a, m, 0.5 * tol, depth - 1, out);
  adapt1(f, m, b, 0.5 * tol, depth - 1, out);
}
}  // namespace detail

// adaptive bisection with absolute tolerance; throws numeric_error on failure
template <class F>
inline QuadResult integrate_adaptive(F&& f, double a, double b, double tol, int max_depth = 48) {
  QuadResult out{0.0, 0.0, 0};
  detail::adapt1(f, a, b, tol, max_depth, out);
  return out;
}

namespace detail {
template <class F>
double gl15x15(F& f, double ax, double bx, double ay, double by) {
  const GL15& r = gl15_rule();
  double cx = 0.5 * (ax + bx), hx = 0.5 * (bx - ax);
  double cy = 0.5 * (ay + by), hy = 0.5 * (by - ay);
  double s = 0.0;
  for (int i = 0; i < 15; ++i) {
    double xi = cx + hx * r.x[i], si = 0.0;
    for (int j = 0; j < 15; ++j) si += r.w[j] * f(xi, cy + hy * r.x[j]);
    s += r.w[i] * si;
  }
  return s * hx * hy;
}

template <class F>
void adapt2(F& f, double ax, double bx, double ay, double by, double tol, int depth,
            QuadResult& out) {
  double whole = gl15x15(f, ax, bx, ay, by);
  double mx = 0.5 * (ax + bx), my = 0.5 * (ay + by);
  double parts = gl15x15(f, ax, mx, ay, my) + gl15x15(f, mx, bx, ay, my) +
                 gl15x15(f, ax, mx, my, by) + gl15x15(f, mx, bx, my, by);
  out.evals += 5 * 225;
  double err = std::abs(parts - whole);
  if (err <= tol) {
    out.value += parts;
    out.error_est += err;
    return;
  }
  if (depth <= 0) throw numeric_error("integrate2d_adaptive: tolerance not reached");
  double t4 = 0.25 * tol;
  adapt2(f, ax, mx, ay, my, t4, depth - 1, out);
  adapt2(f, mx, bx, ay, my, t4, depth - 1, out);
  adapt2(f, ax, mx, my, by, t4, depth - 1, out);
  adapt2(f, mx, bx, my, by, t4, depth - 1, out);
}
}  // namespace detail

template <class F>
inline QuadResult integrate2d_adaptive(F&& f, double ax, double bx, double ay, double by,
                                       double tol, int max_depth = 24) {
  QuadResult out{0.0, 0.0, 0};
  detail::adapt2(f, ax, bx, ay, by, tol, max_depth, out);
  return out;
}

}  // namespace elld
