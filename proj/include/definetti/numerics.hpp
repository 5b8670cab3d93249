#pragma once

#include <functional>
#include <span>
#include <vector>

namespace definetti::numerics {

/// Solves a tridiagonal system (Thomas algorithm). `lower[0]` and
/// `upper[n-1]` are ignored. Returns the solution; throws NumericalError on a
/// zero pivot. Instantiated for double and long double.
template <typename T>
std::vector<T> solve_tridiagonal(std::vector<T> lower, std::vector<T> diag, std::vector<T> upper,
                                 std::vector<T> rhs);

struct RootScan {
  double root = 0.0;
  int sign_changes = 0;
  double residual = 0.0;
};

/// Smallest root of f on [lo, hi], given f(lo) > 0 >= f(hi).
///
/// Scans `scan_points` equispaced abscissae, counts sign changes, then refines
/// the leftmost bracket by bisection with a safeguarded secant step until the
/// bracket collapses to a few ulps.
RootScan smallest_root(const std::function<double(double)>& f, double lo, double hi,
                       int scan_points = 512);

/// Bisection/secant refinement of a bracket [a, b] with f(a) f(b) <= 0.
double refine_root(const std::function<double(double)>& f, double a, double fa, double b, double fb);

/// Pairwise summation, deterministic for a given input order.
double pairwise_sum(std::span<const double> xs);

/// Value, first and second derivative of a scalar function at one point.
struct Jet {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
};

/// Quintic Hermite interpolation on [x0, x1] from value, first and second
/// derivative at both ends; returns value and the first two derivatives.
Jet quintic_hermite(double x0, const Jet& f0, double x1, const Jet& f1, double x);
/// Same, with the increment dv = f1.v - f0.v supplied by the caller (which may
/// know it more accurately than the rounded difference).
Jet quintic_hermite(double x0, const Jet& f0, double x1, const Jet& f1, double x, double dv);

/// Uniform grid of n points on [a, b] (n >= 2), endpoints exact.
std::vector<double> linspace(double a, double b, int n);

}  // namespace definetti::numerics
