#pragma once

// Independent numerical oracles for the tests. Nothing here calls into the
// library, so agreement with library results is a genuine cross-check.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

/// Classical RK4 for y'' = g(x, y, y') from x0 to x1 in n steps; returns
/// {y(x1), y'(x1)}.
inline std::array<double, 2> rk4_second_order(const std::function<double(double, double, double)>& g, double x0,
                                              double y0, double dy0, double x1, int n) {
  const double h = (x1 - x0) / n;
  double x = x0, y = y0, v = dy0;
  for (int i = 0; i < n; ++i) {
    const double k1y = v, k1v = g(x, y, v);
    const double k2y = v + 0.5 * h * k1v, k2v = g(x + 0.5 * h, y + 0.5 * h * k1y, v + 0.5 * h * k1v);
    const double k3y = v + 0.5 * h * k2v, k3v = g(x + 0.5 * h, y + 0.5 * h * k2y, v + 0.5 * h * k2v);
    const double k4y = v + h * k3v, k4v = g(x + h, y + h * k3y, v + h * k3v);
    y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    x = x0 + (i + 1) * h;
  }
  return {y, v};
}

/// Plain bisection to |b - a| <= tol; needs f(a) f(b) <= 0.
inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-14) {
  double fa = f(a);
  if (fa == 0.0) return a;
  if ((fa > 0) == (f(b) > 0)) throw std::runtime_error("bisect: no sign change");
  for (int i = 0; i < 400 && std::abs(b - a) > tol; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

namespace detail {
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                          double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50);
}

/// Central first derivative with one Richardson step (error O(h^4)).
inline double richardson_d1(const std::function<double(double)>& f, double x, double h = 1e-3) {
  auto c = [&](double s) { return (f(x + s) - f(x - s)) / (2 * s); };
  return (4 * c(0.5 * h) - c(h)) / 3.0;
}

/// Central second derivative with one Richardson step (error O(h^4)).
inline double richardson_d2(const std::function<double(double)>& f, double x, double h = 1e-2) {
  auto c = [&](double s) { return (f(x + s) - 2 * f(x) + f(x - s)) / (s * s); };
  return (4 * c(0.5 * h) - c(h)) / 3.0;
}

}  // namespace oracle
