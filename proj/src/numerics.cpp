#include "definetti/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "definetti/errors.hpp"

namespace definetti::numerics {

template <typename T>
std::vector<T> solve_tridiagonal(std::vector<T> lower, std::vector<T> diag, std::vector<T> upper,
                                 std::vector<T> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n || n == 0)
    throw NumericalError("tridiagonal system with inconsistent sizes");
  for (std::size_t i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0) throw NumericalError("zero pivot in tridiagonal solve");
    const T m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (diag[n - 1] == 0.0) throw NumericalError("zero pivot in tridiagonal solve");
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  return rhs;
}

template std::vector<double> solve_tridiagonal(std::vector<double>, std::vector<double>,
                                               std::vector<double>, std::vector<double>);
template std::vector<long double> solve_tridiagonal(std::vector<long double>, std::vector<long double>,
                                                    std::vector<long double>, std::vector<long double>);

double refine_root(const std::function<double(double)>& f, double a, double fa, double b, double fb) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw InconsistencyError("refine_root: bracket has no sign change");
  for (int it = 0; it < 200; ++it) {
    const double width = b - a;
    if (std::abs(width) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)))
      break;
    // Secant candidate, accepted only well inside the bracket.
    double x = b - fb * (b - a) / (fb - fa);
    const double mid = 0.5 * (a + b);
    const double lo = std::min(a, b) + 0.1 * std::abs(width);
    const double hi = std::max(a, b) - 0.1 * std::abs(width);
    if (!(x > lo && x < hi) || it % 3 == 2) x = mid;
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0) == (fa > 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
  }
  return std::abs(fa) < std::abs(fb) ? a : b;
}

RootScan smallest_root(const std::function<double(double)>& f, double lo, double hi, int scan_points) {
  if (!(hi > lo) || scan_points < 2) throw DomainError("smallest_root: empty interval");
  RootScan out;
  double x_prev = lo;
  double f_prev = f(lo);
  if (!(f_prev > 0.0)) throw InconsistencyError("smallest_root: f(lo) must be positive");
  bool found = false;
  double a = 0, fa = 0, b = 0, fb = 0;
  for (int i = 1; i < scan_points; ++i) {
    const double x = (i == scan_points - 1) ? hi : lo + (hi - lo) * i / (scan_points - 1);
    const double fx = f(x);
    if ((f_prev > 0.0) != (fx > 0.0)) {
      ++out.sign_changes;
      if (!found) {
        found = true;
        a = x_prev;
        fa = f_prev;
        b = x;
        fb = fx;
      }
    }
    x_prev = x;
    f_prev = fx;
  }
  if (!found) throw InconsistencyError("smallest_root: no sign change on the scan grid");
  out.root = refine_root(f, a, fa, b, fb);
  out.residual = f(out.root);
  return out;
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

Jet quintic_hermite(double x0, const Jet& f0, double x1, const Jet& f1, double x) {
  return quintic_hermite(x0, f0, x1, f1, x, f1.v - f0.v);
}

// Written in terms of the increment: H0 + H3 = 1, D0 + D3 = 0, E0 + E3 = 0.
Jet quintic_hermite(double x0, const Jet& f0, double x1, const Jet& f1, double x, double dv) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;

  const double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
  const double H2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
  const double H3 = 10 * s3 - 15 * s4 + 6 * s5;
  const double H4 = -4 * s3 + 7 * s4 - 3 * s5;
  const double H5 = 0.5 * (s3 - 2 * s4 + s5);

  const double D1 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
  const double D2 = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4);
  const double D3 = 30 * s2 - 60 * s3 + 30 * s4;
  const double D4 = -12 * s2 + 28 * s3 - 15 * s4;
  const double D5 = 0.5 * (3 * s2 - 8 * s3 + 5 * s4);

  const double E1 = -36 * s + 96 * s2 - 60 * s3;
  const double E2 = 0.5 * (2 - 18 * s + 36 * s2 - 20 * s3);
  const double E3 = 60 * s - 180 * s2 + 120 * s3;
  const double E4 = -24 * s + 84 * s2 - 60 * s3;
  const double E5 = 0.5 * (6 * s - 24 * s2 + 20 * s3);

  Jet out;
  out.v = f0.v + dv * H3 + h * (f0.d1 * H1 + f1.d1 * H4) + h * h * (f0.d2 * H2 + f1.d2 * H5);
  out.d1 = dv * D3 / h + f0.d1 * D1 + f1.d1 * D4 + h * (f0.d2 * D2 + f1.d2 * D5);
  out.d2 = dv * E3 / (h * h) + (f0.d1 * E1 + f1.d1 * E4) / h + f0.d2 * E2 + f1.d2 * E5;
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 2) throw DomainError("linspace needs at least two points");
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  xs.back() = b;
  return xs;
}

}  // namespace definetti::numerics
