#pragma once

#include <optional>

#include "definetti/model.hpp"

namespace definetti {

/// Increasing fundamental solution psi of (sigma^2/2) f'' + c f' - q f = 0 for a
/// Brownian motion with drift c, normalised psi(0) = 0, psi'(0) = 1:
///
///   psi(x) = sigma^2 / s * exp(-c x / sigma^2) * sinh(s x / sigma^2),
///   s = sqrt(c^2 + 2 q sigma^2).
///
/// The drift may be any real number; the model's psi uses c = mu.
class ScaleFunction {
 public:
  ScaleFunction(double drift, double sigma, double q);
  explicit ScaleFunction(const ModelParams& p) : ScaleFunction(p.mu(), p.sigma(), p.q()) {}

  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  /// Closed-form antiderivative int_0^x psi(y) dy.
  double integral(double x) const;
  /// psi~(x) = 1 + (2q/sigma^2) int_0^x psi(y) dy, by adaptive Gauss-Kronrod.
  double tilde(double x) const;
  /// Unique zero of psi'' on (0, inf).
  double inflection() const;

  double root_plus() const noexcept { return r_plus_; }
  double root_minus() const noexcept { return r_minus_; }

 private:
  double drift_, sigma_, q_;
  double s_;        // sqrt(c^2 + 2 q sigma^2)
  double r_plus_;   // (-c + s) / sigma^2 > 0
  double r_minus_;  // (-c - s) / sigma^2 < 0
};

double psi(const ModelParams& p, double x);
double psi_d1(const ModelParams& p, double x);
double psi_d2(const ModelParams& p, double x);
double psi_inflection(const ModelParams& p);
double psi_tilde(const ModelParams& p, double x);

// ---------------------------------------------------------------------------
// Parabolic cylinder functions D_{-lambda}, lambda > 0, through the integral
//   D_{-lambda}(x) = e^{-x^2/4} / Gamma(lambda) * int_0^inf t^{lambda-1} e^{-xt - t^2/2} dt.
//
// The Gaussian prefactor is kept separate: the "scaled" function
// e^{x^2/4} D_{-lambda}(x) is what every first-passage formula consumes, and its
// logarithm stays representable far beyond the range where D itself under- or
// overflows.

double parabolic_cylinder(double lambda, double x);
/// log(e^{x^2/4} D_{-lambda}(x)).
double log_scaled_parabolic_cylinder(double lambda, double x);
/// e^{x^2/4} D_{-lambda}(x).
double scaled_parabolic_cylinder(double lambda, double x);
/// d/dx [e^{x^2/4} D_{-lambda}(x)] = -lambda e^{x^2/4} D_{-lambda-1}(x) (always negative).
double scaled_parabolic_cylinder_deriv(double lambda, double x);

/// H_K^{(q)}(x; m, sigma) = e^{K (x - m/K)^2 / (2 sigma^2)} D_{-q/K}((x - m/K) sqrt(2K) / sigma).
/// A negative sigma reflects the argument of D and yields the increasing
/// solution of the Ornstein-Uhlenbeck equation.
double H_Kq(double x, double m, double sigma, double K, double q);
double H_Kq_deriv(double x, double m, double sigma, double K, double q);

/// S(nu, x, y) = Gamma(nu)/pi e^{(x^2+y^2)/4} (D_{-nu}(-x) D_{-nu}(y) - D_{-nu}(x) D_{-nu}(-y)).
double S_fn(double nu, double x, double y);

/// I_F for F(x) = Kx: (K/(q+K)) (x + mu/q).
double I_K_closed(const ModelParams& p, double K, double x);

/// I_F for F(x) = R + Kx. The affine ansatz a x + c in Gamma_F(f) = -F forces
/// a = K/(q+K) and c = K mu / (q (q+K)) + R/(q+K).
double I_affine_closed(const ModelParams& p, double K, double R, double x);

/// phi_F(x) = H_K^{(q)}(x; mu - R, sigma) / H_K^{(q)}(0; mu - R, sigma) for F = R + Kx.
double phi_affine(const ModelParams& p, double K, double R, double x);
double phi_affine_deriv(const ModelParams& p, double K, double R, double x);

/// Delta = -H(0)/H'(0) for the affine bound; pi_0 is optimal iff
/// Delta >= K mu / q^2 + R / q.
double delta_threshold(const ModelParams& p, double K, double R);

/// Closed-form solution of the control problem with F(x) = R + Kx.
class AffineClosedForm {
 public:
  AffineClosedForm(const ModelParams& p, double K, double R);

  double phi(double x) const;
  double phi_d1(double x) const;
  double IF(double x) const;
  double IF_d1() const { return K_ / (p_.q() + K_); }

  double delta() const { return delta_; }
  double threshold() const;
  bool zero_barrier() const { return delta_ >= threshold(); }

  /// Root in (0, b_hat] of the specialised smooth-fit equation
  ///   psi/psi' - (b + mu/q) - R/K = -(q/K)(psi/psi' - H(b)/H'(b)).
  /// Only meaningful when !zero_barrier().
  double optimal_barrier() const;
  /// Optimal value function V(x) (zero-barrier or threshold form).
  double value(double x) const;

  const ModelParams& params() const { return p_; }
  double K() const { return K_; }
  double R() const { return R_; }

 private:
  ModelParams p_;
  double K_, R_;
  double delta_;
  double b_star_ = 0.0;
};

/// Laplace transforms of hitting times for the capped-linear bound F = min(Kx, R);
/// c = R/K is the junction level.
///   A(x) = E_x[e^{-q tau_c}],                x >= c  (Brownian motion, drift mu - R)
///   B(x) = E_x[e^{-q tau_0}; tau_0 < tau_c], 0 <= x <= c  (OU below the cap)
///   C(x) = E_x[e^{-q tau_c}; tau_c < tau_0], 0 <= x <= c
///   D(x) = E_x[e^{-q tau_c}],                x <= c
/// Values outside the operative range are left empty.
struct CappedTransforms {
  std::optional<double> A, B, C, D;
};

struct JunctionValues {
  double phi_at_junction;
  double IF_at_junction;
};

class CappedClosedForm {
 public:
  CappedClosedForm(const ModelParams& p, double K, double R);

  double junction() const { return c_; }
  const JunctionValues& junction_values() const { return jv_; }

  double A(double x) const;
  double B(double x) const;
  double C(double x) const;
  double D(double x) const;
  double A_d1(double x) const;
  double B_d1(double x) const;
  double C_d1(double x) const;
  double D_d1(double x) const;
  /// A through the printed scale-function form psi~(y) - 2q/(s - (mu-R)) psi(y),
  /// y = x - R/K, with psi, psi~ built for drift mu - R. Loses precision to
  /// cancellation for large y; kept as an independent route for A.
  double A_scale_form(double x) const;

  double phi(double x) const;
  double phi_d1(double x) const;
  double IF(double x) const;
  double IF_d1(double x) const;

  double regime_statistic() const;
  bool zero_barrier() const { return regime_statistic() <= 1.0; }
  /// Smallest root in (0, b_hat] of the smooth-fit equation, built from the
  /// closed-form phi_F and I_F.
  double optimal_barrier() const;
  /// Optimal value function assembled piecewise from A, B, C, D.
  double value(double x) const;

  const ModelParams& params() const { return p_; }

 private:
  double z(double x) const;  // (x - mu/K) sqrt(2K)/sigma
  double dz() const;         // sqrt(2K)/sigma
  double w(double a, double b) const;
  double w_da(double a, double b) const;
  double w_db(double a, double b) const;

  ModelParams p_;
  double K_, R_, c_;
  double nu_;
  double theta_;  // decay rate of A
  double z0_, zc_;
  double w_c0_;   // w(z_c, z_0), common denominator of B and C
  JunctionValues jv_;
  double b_star_ = 0.0;
  bool zero_barrier_ = true;
};

CappedTransforms capped_transforms(const ModelParams& p, double K, double R, double x);
JunctionValues capped_junction(const ModelParams& p, double K, double R);

}  // namespace definetti
