#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace definetti {

/// Drift, volatility and discount rate of the uncontrolled state
/// X_t = x + mu t + sigma W_t. All three must be strictly positive.
class ModelParams {
 public:
  ModelParams(double mu, double sigma, double q);

  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }
  double q() const noexcept { return q_; }
  double variance() const noexcept { return sigma_ * sigma_; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double mu_;
  double sigma_;
  double q_;
};

enum class BoundKind { Constant, Linear, Affine, CappedLinear, Custom };

std::string to_string(BoundKind kind);

/// Sampling grid used to validate user-supplied bounds pointwise.
struct ValidationGrid {
  double x_max = 50.0;
  int points = 1024;
};

/// Concave, nondecreasing ceiling F on the control rate.
///
/// Evaluation is total on the real line: for x <= 0 every variant returns the
/// Lipschitz extension F(0) + F'(0+) x. At a kink the derivative is the left
/// derivative (for CappedLinear at R/K this is K).
class BoundFn {
 public:
  static BoundFn constant(double R);
  static BoundFn linear(double K);
  static BoundFn affine(double K, double R);
  static BoundFn capped_linear(double K, double R);

  /// Arbitrary concave bound given by callables valid on [0, inf). `kinks`
  /// lists points where F is not differentiable, if any.
  static BoundFn custom(std::function<double(double)> value,
                        std::function<double(double)> derivative,
                        double right_slope_at_zero, std::vector<double> kinks = {},
                        ValidationGrid grid = {}, std::string label = "custom");

  /// Tabulated (x, F(x)) pairs with x[0] == 0, interpolated by monotone
  /// piecewise-cubic Hermite splines and extended linearly past the last knot.
  static BoundFn tabulated(std::vector<double> xs, std::vector<double> values,
                           ValidationGrid grid = {});

  /// Smooth concave majorant of min(Kx, R): the hyperbolic smoothing
  /// (Kx + R)/2 - sqrt((Kx - R)^2/4 + eps^2) + eps. Decreases to min(Kx, R)
  /// as eps -> 0.
  static BoundFn smoothed_capped_linear(double K, double R, double eps);

  double operator()(double x) const;
  double derivative(double x) const;

  BoundKind kind() const noexcept { return kind_; }
  double K() const noexcept { return K_; }
  double R() const noexcept { return R_; }
  double value_at_zero() const noexcept { return f0_; }
  double slope_at_zero() const noexcept { return slope0_; }

  /// Points of non-differentiability on (0, inf).
  const std::vector<double>& kinks() const noexcept { return kinks_; }
  bool kinked() const noexcept { return !kinks_.empty(); }

  /// F identically zero: no control is ever admissible.
  bool is_zero() const noexcept;
  /// F constant on the real line (F'(0+) = 0).
  bool is_constant() const noexcept { return slope0_ == 0.0; }

  /// Tabulated knots, empty unless built by tabulated().
  const std::vector<double>& table_x() const noexcept { return table_x_; }
  const std::vector<double>& table_values() const noexcept { return table_f_; }

  std::string describe() const;

 private:
  BoundFn() = default;
  void validate_sampled(const ValidationGrid& grid) const;

  BoundKind kind_ = BoundKind::Constant;
  double K_ = 0.0;
  double R_ = 0.0;
  double f0_ = 0.0;
  double slope0_ = 0.0;
  std::vector<double> kinks_;
  std::string label_;
  std::shared_ptr<const std::function<double(double)>> value_fn_;
  std::shared_ptr<const std::function<double(double)>> deriv_fn_;
  std::vector<double> table_x_;
  std::vector<double> table_f_;
};

double eval_bound(const BoundFn& f, double x);
double eval_bound_deriv(const BoundFn& f, double x);

}  // namespace definetti
