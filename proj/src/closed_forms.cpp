#include "definetti/closed_forms.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "definetti/errors.hpp"
#include "definetti/numerics.hpp"

namespace definetti {

// ---------------------------------------------------------------------------
// psi

ScaleFunction::ScaleFunction(double drift, double sigma, double q)
    : drift_(drift), sigma_(sigma), q_(q) {
  if (!(sigma > 0.0) || !(q > 0.0)) throw DomainError("ScaleFunction: sigma and q must be > 0");
  const double var = sigma * sigma;
  s_ = std::sqrt(drift * drift + 2.0 * q * var);
  r_plus_ = (-drift + s_) / var;
  r_minus_ = (-drift - s_) / var;
}

double ScaleFunction::value(double x) const {
  if (x < 0.0) throw DomainError("psi: x must be >= 0");
  const double var = sigma_ * sigma_;
  return var / (2.0 * s_) * std::exp(r_minus_ * x) * std::expm1(2.0 * s_ * x / var);
}

double ScaleFunction::d1(double x) const {
  if (x < 0.0) throw DomainError("psi': x must be >= 0");
  const double var = sigma_ * sigma_;
  return var / (2.0 * s_) * (r_plus_ * std::exp(r_plus_ * x) - r_minus_ * std::exp(r_minus_ * x));
}

double ScaleFunction::d2(double x) const {
  if (x < 0.0) throw DomainError("psi'': x must be >= 0");
  const double var = sigma_ * sigma_;
  return var / (2.0 * s_) *
         (r_plus_ * r_plus_ * std::exp(r_plus_ * x) - r_minus_ * r_minus_ * std::exp(r_minus_ * x));
}

double ScaleFunction::integral(double x) const {
  if (x < 0.0) throw DomainError("psi integral: x must be >= 0");
  const double var = sigma_ * sigma_;
  return var / (2.0 * s_) * (std::expm1(r_plus_ * x) / r_plus_ - std::expm1(r_minus_ * x) / r_minus_);
}

double ScaleFunction::tilde(double x) const {
  if (x < 0.0) throw DomainError("psi~: x must be >= 0");
  if (x == 0.0) return 1.0;
  using boost::math::quadrature::gauss_kronrod;
  auto f = [this](double y) { return value(y); };
  const double area = gauss_kronrod<double, 31>::integrate(f, 0.0, x, 20, 1e-14);
  return 1.0 + 2.0 * q_ / (sigma_ * sigma_) * area;
}

double ScaleFunction::inflection() const {
  if (!(drift_ > 0.0)) throw DomainError("psi has no inflection point for nonpositive drift");
  return 2.0 * std::log(-r_minus_ / r_plus_) / (r_plus_ - r_minus_);
}

double psi(const ModelParams& p, double x) { return ScaleFunction(p).value(x); }
double psi_d1(const ModelParams& p, double x) { return ScaleFunction(p).d1(x); }
double psi_d2(const ModelParams& p, double x) { return ScaleFunction(p).d2(x); }
double psi_inflection(const ModelParams& p) { return ScaleFunction(p).inflection(); }
double psi_tilde(const ModelParams& p, double x) { return ScaleFunction(p).tilde(x); }

// ---------------------------------------------------------------------------
// Parabolic cylinder functions

namespace {

// log of J_lambda(u) = int_0^inf t^{lambda-1} exp(-u t - t^2/2) dt.
//
// The log-integrand is concave for lambda >= 1 with maximum at
// t* = (-u + sqrt(u^2 + 4(lambda-1)))/2, and for lambda < 1 its smooth part
// peaks at max(0, -u). It is normalised by its value at that point, split
// there, and truncated 12 units further right, where the Gaussian factor
// bounds the remainder by e^{-72} relative to the peak. For lambda < 1 the
// piece touching 0 is integrated in s = t^lambda.
double log_J(double lambda, double u) {
  double t_ref;
  if (lambda > 1.0)
    t_ref = 0.5 * (-u + std::sqrt(u * u + 4.0 * (lambda - 1.0)));
  else
    t_ref = std::max(0.0, -u);
  const double shift =
      (t_ref > 0.0 ? (lambda - 1.0) * std::log(t_ref) : 0.0) - u * t_ref - 0.5 * t_ref * t_ref;
  // Two-argument form: Boost passes the distance to the nearest endpoint as
  // well and skips its endpoint-rounding assertions.
  auto g = [lambda, u, shift](double t, double) {
    if (t <= 0.0) return 0.0;
    return std::exp((lambda - 1.0) * std::log(t) - u * t - 0.5 * t * t - shift);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  constexpr double tol = 1e-15;
  double right = t_ref + 12.0;
  if (u > 0.0) right = t_ref + std::min(12.0, std::max(80.0 / u, 1.0));
  double split = t_ref;
  if (lambda < 1.0 && split == 0.0) split = std::min(1.0, 0.5 * right);
  double total = 0.0;
  if (split > 0.0) {
    if (lambda < 1.0) {
      // s = t^lambda absorbs the t^{lambda-1} singularity at 0.
      const double inv = 1.0 / lambda;
      auto gs = [inv, lambda, u, shift](double s, double) {
        const double t = s > 0.0 ? std::pow(s, inv) : 0.0;
        return std::exp(-u * t - 0.5 * t * t - shift) / lambda;
      };
      total += integrator.integrate(gs, 0.0, std::pow(split, lambda), tol);
    } else {
      total += integrator.integrate(g, 0.0, split, tol);
    }
  }
  total += integrator.integrate(g, split, right, tol);
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("parabolic cylinder quadrature failed");
  return shift + std::log(total);
}

}  // namespace

double log_scaled_parabolic_cylinder(double lambda, double x) {
  if (!(lambda > 0.0)) throw DomainError("parabolic cylinder D_{-lambda} requires lambda > 0");
  return log_J(lambda, x) - std::lgamma(lambda);
}

double scaled_parabolic_cylinder(double lambda, double x) {
  return std::exp(log_scaled_parabolic_cylinder(lambda, x));
}

double scaled_parabolic_cylinder_deriv(double lambda, double x) {
  if (!(lambda > 0.0)) throw DomainError("parabolic cylinder D_{-lambda} requires lambda > 0");
  return -std::exp(log_J(lambda + 1.0, x) - std::lgamma(lambda));
}

double parabolic_cylinder(double lambda, double x) {
  return std::exp(log_scaled_parabolic_cylinder(lambda, x) - 0.25 * x * x);
}

namespace {

struct OuCoordinate {
  double center, scale;  // z = (x - center) * scale
  double operator()(double x) const { return (x - center) * scale; }
};

OuCoordinate ou_coordinate(double m, double sigma, double K) {
  if (!(K > 0.0)) throw DomainError("H_K^(q): K must be > 0");
  if (sigma == 0.0 || !std::isfinite(sigma)) throw DomainError("H_K^(q): sigma must be nonzero");
  return {m / K, std::sqrt(2.0 * K) / sigma};
}

}  // namespace

double H_Kq(double x, double m, double sigma, double K, double q) {
  if (!(q > 0.0)) throw DomainError("H_K^(q): q must be > 0");
  const auto z = ou_coordinate(m, sigma, K);
  return scaled_parabolic_cylinder(q / K, z(x));
}

double H_Kq_deriv(double x, double m, double sigma, double K, double q) {
  if (!(q > 0.0)) throw DomainError("H_K^(q): q must be > 0");
  const auto z = ou_coordinate(m, sigma, K);
  return scaled_parabolic_cylinder_deriv(q / K, z(x)) * z.scale;
}

double S_fn(double nu, double x, double y) {
  if (!(nu > 0.0)) throw DomainError("S(nu, x, y) requires nu > 0");
  // Gamma(nu)/pi * (Ds(-x) Ds(y) - Ds(x) Ds(-y)), Ds = scaled D_{-nu}; the
  // Gamma factors cancel down to a single 1/Gamma(nu).
  const double t1 = log_J(nu, -x) + log_J(nu, y);
  const double t2 = log_J(nu, x) + log_J(nu, -y);
  const double m = std::max(t1, t2);
  return std::exp(m - std::lgamma(nu)) / std::numbers::pi * (std::exp(t1 - m) - std::exp(t2 - m));
}

// ---------------------------------------------------------------------------
// Affine bound

double I_K_closed(const ModelParams& p, double K, double x) {
  if (!(K > 0.0)) throw DomainError("I_K requires K > 0");
  return K / (p.q() + K) * (x + p.mu() / p.q());
}

double I_affine_closed(const ModelParams& p, double K, double R, double x) {
  if (!(K > 0.0)) throw DomainError("affine I_F requires K > 0");
  const double q = p.q();
  return K / (q + K) * (x + p.mu() / q) + R / (q + K);
}

double phi_affine(const ModelParams& p, double K, double R, double x) {
  if (x < 0.0) throw DomainError("phi_F: x must be >= 0");
  const auto z = ou_coordinate(p.mu() - R, p.sigma(), K);
  const double nu = p.q() / K;
  return std::exp(log_scaled_parabolic_cylinder(nu, z(x)) - log_scaled_parabolic_cylinder(nu, z(0.0)));
}

double phi_affine_deriv(const ModelParams& p, double K, double R, double x) {
  if (x < 0.0) throw DomainError("phi_F': x must be >= 0");
  const auto z = ou_coordinate(p.mu() - R, p.sigma(), K);
  const double nu = p.q() / K;
  return -std::exp(log_J(nu + 1.0, z(x)) - log_J(nu, z(0.0))) * z.scale;
}

double delta_threshold(const ModelParams& p, double K, double R) {
  return -1.0 / phi_affine_deriv(p, K, R, 0.0);
}

AffineClosedForm::AffineClosedForm(const ModelParams& p, double K, double R) : p_(p), K_(K), R_(R) {
  if (!(K > 0.0)) throw DomainError("affine closed form requires K > 0");
  if (R < 0.0) throw DomainError("affine closed form requires R >= 0");
  delta_ = delta_threshold(p, K, R);
  if (!zero_barrier()) b_star_ = optimal_barrier();
}

double AffineClosedForm::phi(double x) const { return phi_affine(p_, K_, R_, x); }
double AffineClosedForm::phi_d1(double x) const { return phi_affine_deriv(p_, K_, R_, x); }
double AffineClosedForm::IF(double x) const { return I_affine_closed(p_, K_, R_, x); }

double AffineClosedForm::threshold() const {
  const double q = p_.q();
  return K_ * p_.mu() / (q * q) + R_ / q;
}

double AffineClosedForm::optimal_barrier() const {
  if (b_star_ > 0.0) return b_star_;
  const ScaleFunction psi_fn(p_);
  const double q = p_.q(), mu = p_.mu();
  // phi/phi' = H/H' since both carry the same normalisation.
  auto eq = [&](double b) {
    const double ratio_psi = psi_fn.value(b) / psi_fn.d1(b);
    const double ratio_h = phi(b) / phi_d1(b);
    return ratio_psi - (b + mu / q) - R_ / K_ + (q / K_) * (ratio_psi - ratio_h);
  };
  const double b_hat = psi_fn.inflection();
  // eq(0+) < 0 in the threshold regime; negate for the "f(lo) > 0" convention.
  auto f = [&](double b) { return -eq(b); };
  return numerics::smallest_root(f, 1e-8 * b_hat, b_hat).root;
}

double AffineClosedForm::value(double x) const {
  if (x < 0.0) throw DomainError("V: x must be >= 0");
  if (zero_barrier()) return IF(x) - IF(0.0) * phi(x);
  const ScaleFunction psi_fn(p_);
  if (x <= b_star_) return psi_fn.value(x) / psi_fn.d1(b_star_);
  const double C2 = (1.0 - IF_d1()) / phi_d1(b_star_);
  return IF(x) + C2 * phi(x);
}

// ---------------------------------------------------------------------------
// Capped-linear bound

CappedClosedForm::CappedClosedForm(const ModelParams& p, double K, double R) : p_(p), K_(K), R_(R) {
  if (!(K > 0.0) || !(R > 0.0)) throw DomainError("capped closed form requires K, R > 0");
  c_ = R / K;
  nu_ = p.q() / K;
  const double drift_above = p.mu() - R;
  theta_ = (drift_above + std::sqrt(drift_above * drift_above + 2.0 * p.q() * p.variance())) / p.variance();
  z0_ = z(0.0);
  zc_ = z(c_);
  w_c0_ = w(zc_, z0_);
  if (!(w_c0_ != 0.0) || !std::isfinite(w_c0_))
    throw NumericalError("capped closed form: degenerate two-sided transform denominator");

  const double dA = A_d1(c_), dC = C_d1(c_), dB = B_d1(c_), dD = D_d1(c_);
  const double den_phi = dA - dC;
  const double den_I = dA - dD;
  if (std::abs(den_phi) < 1e-12 || std::abs(den_I) < 1e-12)
    throw NumericalError("capped junction: ill-conditioned parameters (A' - C' or A' - D' ~ 0)");
  const double q = p.q();
  jv_.phi_at_junction = dB / den_phi;
  jv_.IF_at_junction = (K / (q + K) - dD * I_K_closed(p, K, c_) + (R / q) * dA) / den_I;
  if (!(jv_.phi_at_junction > 0.0 && jv_.phi_at_junction < 1.0) ||
      !(jv_.IF_at_junction > 0.0 && jv_.IF_at_junction < R / q))
    throw InconsistencyError("capped junction values outside their theoretical ranges");

  zero_barrier_ = regime_statistic() <= 1.0;
  if (!zero_barrier_) b_star_ = optimal_barrier();
}

double CappedClosedForm::z(double x) const { return (x - p_.mu() / K_) * dz(); }
double CappedClosedForm::dz() const { return std::sqrt(2.0 * K_) / p_.sigma(); }

// w(a, b) = Ds(-a) Ds(b) - Ds(a) Ds(-b) with Ds the scaled D_{-nu}; S = Gamma/pi * w.
double CappedClosedForm::w(double a, double b) const {
  return scaled_parabolic_cylinder(nu_, -a) * scaled_parabolic_cylinder(nu_, b) -
         scaled_parabolic_cylinder(nu_, a) * scaled_parabolic_cylinder(nu_, -b);
}

double CappedClosedForm::w_da(double a, double b) const {
  return -scaled_parabolic_cylinder_deriv(nu_, -a) * scaled_parabolic_cylinder(nu_, b) -
         scaled_parabolic_cylinder_deriv(nu_, a) * scaled_parabolic_cylinder(nu_, -b);
}

double CappedClosedForm::w_db(double a, double b) const {
  return scaled_parabolic_cylinder(nu_, -a) * scaled_parabolic_cylinder_deriv(nu_, b) +
         scaled_parabolic_cylinder(nu_, a) * scaled_parabolic_cylinder_deriv(nu_, -b);
}

double CappedClosedForm::A(double x) const {
  if (x < c_) throw DomainError("A(x) is defined for x >= R/K");
  return std::exp(-theta_ * (x - c_));
}
double CappedClosedForm::A_d1(double x) const {
  if (x < c_) throw DomainError("A'(x) is defined for x >= R/K");
  return -theta_ * std::exp(-theta_ * (x - c_));
}

double CappedClosedForm::A_scale_form(double x) const {
  if (x < c_) throw DomainError("A(x) is defined for x >= R/K");
  const double drift_above = p_.mu() - R_;
  const ScaleFunction above(drift_above, p_.sigma(), p_.q());
  const double s = std::sqrt(drift_above * drift_above + 2.0 * p_.variance() * p_.q());
  const double y = x - c_;
  return above.tilde(y) - 2.0 * p_.q() / (s - drift_above) * above.value(y);
}

double CappedClosedForm::B(double x) const {
  if (x < 0.0 || x > c_) throw DomainError("B(x) is defined for 0 <= x <= R/K");
  return w(zc_, z(x)) / w_c0_;
}
double CappedClosedForm::B_d1(double x) const {
  if (x < 0.0 || x > c_) throw DomainError("B'(x) is defined for 0 <= x <= R/K");
  return w_db(zc_, z(x)) * dz() / w_c0_;
}

double CappedClosedForm::C(double x) const {
  if (x < 0.0 || x > c_) throw DomainError("C(x) is defined for 0 <= x <= R/K");
  return w(z(x), z0_) / w_c0_;
}
double CappedClosedForm::C_d1(double x) const {
  if (x < 0.0 || x > c_) throw DomainError("C'(x) is defined for 0 <= x <= R/K");
  return w_da(z(x), z0_) * dz() / w_c0_;
}

double CappedClosedForm::D(double x) const {
  if (x > c_) throw DomainError("D(x) is defined for x <= R/K");
  return std::exp(log_scaled_parabolic_cylinder(nu_, -z(x)) - log_scaled_parabolic_cylinder(nu_, -zc_));
}
double CappedClosedForm::D_d1(double x) const {
  if (x > c_) throw DomainError("D'(x) is defined for x <= R/K");
  return -scaled_parabolic_cylinder_deriv(nu_, -z(x)) * dz() / scaled_parabolic_cylinder(nu_, -zc_);
}

double CappedClosedForm::phi(double x) const {
  if (x < 0.0) throw DomainError("phi_F: x must be >= 0");
  if (x <= c_) return B(x) + C(x) * jv_.phi_at_junction;
  return A(x) * jv_.phi_at_junction;
}

double CappedClosedForm::phi_d1(double x) const {
  if (x < 0.0) throw DomainError("phi_F': x must be >= 0");
  if (x <= c_) return B_d1(x) + C_d1(x) * jv_.phi_at_junction;
  return A_d1(x) * jv_.phi_at_junction;
}

double CappedClosedForm::IF(double x) const {
  if (x <= c_) return I_K_closed(p_, K_, x) - D(x) * (I_K_closed(p_, K_, c_) - jv_.IF_at_junction);
  const double a = A(x);
  return R_ / p_.q() * (1.0 - a) + a * jv_.IF_at_junction;
}

double CappedClosedForm::IF_d1(double x) const {
  if (x <= c_) return K_ / (p_.q() + K_) - D_d1(x) * (I_K_closed(p_, K_, c_) - jv_.IF_at_junction);
  return A_d1(x) * (jv_.IF_at_junction - R_ / p_.q());
}

double CappedClosedForm::regime_statistic() const {
  return IF_d1(0.0) - IF(0.0) * phi_d1(0.0);
}

double CappedClosedForm::optimal_barrier() const {
  if (b_star_ > 0.0) return b_star_;
  const ScaleFunction psi_fn(p_);
  auto gap = [&](double b) {
    const double ratio_phi = phi(b) / phi_d1(b);
    const double g = IF(b) - IF_d1(b) * ratio_phi;
    const double h = psi_fn.value(b) / psi_fn.d1(b) - ratio_phi;
    return g - h;
  };
  const double b_hat = psi_fn.inflection();
  return numerics::smallest_root(gap, 1e-8 * b_hat, b_hat).root;
}

double CappedClosedForm::value(double x) const {
  if (x < 0.0) throw DomainError("V: x must be >= 0");
  if (zero_barrier_) return IF(x) - IF(0.0) * phi(x);
  const ScaleFunction psi_fn(p_);
  if (x <= b_star_) return psi_fn.value(x) / psi_fn.d1(b_star_);
  const double C2 = (1.0 - IF_d1(b_star_)) / phi_d1(b_star_);
  return IF(x) + C2 * phi(x);
}

CappedTransforms capped_transforms(const ModelParams& p, double K, double R, double x) {
  if (x < 0.0) throw DomainError("capped transforms: x must be >= 0");
  const CappedClosedForm cf(p, K, R);
  CappedTransforms t;
  if (x >= cf.junction()) t.A = cf.A(x);
  if (x <= cf.junction()) {
    t.B = cf.B(x);
    t.C = cf.C(x);
    t.D = cf.D(x);
  }
  return t;
}

JunctionValues capped_junction(const ModelParams& p, double K, double R) {
  return CappedClosedForm(p, K, R).junction_values();
}

}  // namespace definetti
