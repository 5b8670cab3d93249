#include "definetti/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "definetti/errors.hpp"

namespace definetti {

ModelParams::ModelParams(double mu, double sigma, double q) : mu_(mu), sigma_(sigma), q_(q) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be finite and > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be finite and > 0");
  if (!(q > 0.0) || !std::isfinite(q)) throw ConfigError("q must be finite and > 0");
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::Constant: return "constant";
    case BoundKind::Linear: return "linear";
    case BoundKind::Affine: return "affine";
    case BoundKind::CappedLinear: return "capped_linear";
    case BoundKind::Custom: return "custom";
  }
  return "unknown";
}

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
}

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
struct Pchip {
  std::vector<double> x, y, d;

  Pchip(std::vector<double> xs, std::vector<double> ys) : x(std::move(xs)), y(std::move(ys)) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x[i + 1] - x[i];
      delta[i] = (y[i + 1] - y[i]) / h[i];
    }
    d.assign(n, 0.0);
    if (n == 2) {
      d[0] = d[1] = delta[0];
      return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        d[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  static double end_slope(double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) return 3.0 * d0;
    return s;
  }

  std::size_t segment(double t) const {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - x.begin() - 1, 0));
    return std::min(i, x.size() - 2);
  }

  double value(double t) const {
    if (t >= x.back()) return y.back() + d.back() * (t - x.back());
    const std::size_t i = segment(t);
    const double h = x[i + 1] - x[i];
    const double s = (t - x[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y[i] + (s3 - 2 * s2 + s) * h * d[i] +
           (-2 * s3 + 3 * s2) * y[i + 1] + (s3 - s2) * h * d[i + 1];
  }

  double slope(double t) const {
    if (t >= x.back()) return d.back();
    const std::size_t i = segment(t);
    const double h = x[i + 1] - x[i];
    const double s = (t - x[i]) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * y[i] + (3 * s2 - 4 * s + 1) * h * d[i] +
            (-6 * s2 + 6 * s) * y[i + 1] + (3 * s2 - 2 * s) * h * d[i + 1]) /
           h;
  }
};

}  // namespace

BoundFn BoundFn::constant(double R) {
  require_finite(R, "R");
  if (R < 0.0) throw ConfigError("constant bound requires R >= 0");
  BoundFn f;
  f.kind_ = BoundKind::Constant;
  f.R_ = R;
  f.f0_ = R;
  f.slope0_ = 0.0;
  return f;
}

BoundFn BoundFn::linear(double K) {
  require_finite(K, "K");
  if (!(K > 0.0)) throw ConfigError("linear bound requires K > 0");
  BoundFn f;
  f.kind_ = BoundKind::Linear;
  f.K_ = K;
  f.slope0_ = K;
  return f;
}

BoundFn BoundFn::affine(double K, double R) {
  require_finite(K, "K");
  require_finite(R, "R");
  if (!(K > 0.0)) throw ConfigError("affine bound requires K > 0");
  if (R < 0.0) throw ConfigError("affine bound requires R >= 0");
  BoundFn f;
  f.kind_ = BoundKind::Affine;
  f.K_ = K;
  f.R_ = R;
  f.f0_ = R;
  f.slope0_ = K;
  return f;
}

BoundFn BoundFn::capped_linear(double K, double R) {
  require_finite(K, "K");
  require_finite(R, "R");
  if (!(K > 0.0)) throw ConfigError("capped_linear bound requires K > 0");
  if (!(R > 0.0)) throw ConfigError("capped_linear bound requires R > 0");
  BoundFn f;
  f.kind_ = BoundKind::CappedLinear;
  f.K_ = K;
  f.R_ = R;
  f.slope0_ = K;
  f.kinks_ = {R / K};
  return f;
}

BoundFn BoundFn::custom(std::function<double(double)> value,
                        std::function<double(double)> derivative, double right_slope_at_zero,
                        std::vector<double> kinks, ValidationGrid grid, std::string label) {
  if (!value || !derivative) throw ConfigError("custom bound needs value and derivative callables");
  require_finite(right_slope_at_zero, "F'(0+)");
  if (right_slope_at_zero < 0.0) throw ConfigError("custom bound must be nondecreasing: F'(0+) < 0");
  BoundFn f;
  f.kind_ = BoundKind::Custom;
  f.value_fn_ = std::make_shared<const std::function<double(double)>>(std::move(value));
  f.deriv_fn_ = std::make_shared<const std::function<double(double)>>(std::move(derivative));
  f.f0_ = (*f.value_fn_)(0.0);
  f.slope0_ = right_slope_at_zero;
  require_finite(f.f0_, "F(0)");
  if (f.f0_ < 0.0) throw ConfigError("custom bound requires F(0) >= 0");
  std::sort(kinks.begin(), kinks.end());
  for (double k : kinks)
    if (!(k > 0.0)) throw ConfigError("custom bound kinks must lie in (0, inf)");
  f.kinks_ = std::move(kinks);
  f.label_ = std::move(label);
  f.validate_sampled(grid);
  return f;
}

BoundFn BoundFn::tabulated(std::vector<double> xs, std::vector<double> values, ValidationGrid grid) {
  if (xs.size() != values.size()) throw ConfigError("tabulated bound: x and F columns differ in length");
  if (xs.size() < 2) throw ConfigError("tabulated bound needs at least two knots");
  if (xs.front() != 0.0) throw ConfigError("tabulated bound must start at x = 0");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require_finite(xs[i], "tabulated x");
    require_finite(values[i], "tabulated F");
    if (i > 0 && !(xs[i] > xs[i - 1])) throw ConfigError("tabulated bound: x must be strictly increasing");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (values[i] < values[i - 1])
      throw ConfigError("tabulated bound is not nondecreasing at knot " + std::to_string(i));
    if (i + 1 < xs.size()) {
      const double s0 = (values[i] - values[i - 1]) / (xs[i] - xs[i - 1]);
      const double s1 = (values[i + 1] - values[i]) / (xs[i + 1] - xs[i]);
      if (s1 > s0 + 1e-12 * (1.0 + std::abs(s0)))
        throw ConfigError("tabulated bound is not concave at knot " + std::to_string(i));
    }
  }
  auto spline = std::make_shared<const Pchip>(xs, values);
  const double slope0 = spline->d.front();
  grid.x_max = std::max(grid.x_max, xs.back());
  BoundFn f = custom([spline](double x) { return spline->value(x); },
                     [spline](double x) { return spline->slope(x); }, slope0, {}, grid, "tabulated");
  f.table_x_ = std::move(xs);
  f.table_f_ = std::move(values);
  return f;
}

BoundFn BoundFn::smoothed_capped_linear(double K, double R, double eps) {
  if (!(K > 0.0) || !(R > 0.0) || !(eps > 0.0))
    throw ConfigError("smoothed capped bound requires K, R, eps > 0");
  auto value = [K, R, eps](double x) {
    const double d = 0.5 * (K * x - R);
    return 0.5 * (K * x + R) - std::sqrt(d * d + eps * eps) + eps;
  };
  auto deriv = [K, R, eps](double x) {
    const double d = 0.5 * (K * x - R);
    return 0.5 * K * (1.0 - d / std::sqrt(d * d + eps * eps));
  };
  std::ostringstream label;
  label << "smoothed_capped_linear(K=" << K << ",R=" << R << ",eps=" << eps << ")";
  return custom(value, deriv, deriv(0.0), {}, ValidationGrid{std::max(50.0, 4.0 * R / K), 1024},
                label.str());
}

void BoundFn::validate_sampled(const ValidationGrid& grid) const {
  if (!(grid.x_max > 0.0) || grid.points < 3) throw ConfigError("validation grid must cover (0, x_max] with >= 3 points");
  const int n = grid.points;
  const double h = grid.x_max / (n - 1);
  double prev = (*value_fn_)(0.0);
  double scale = std::abs(prev);
  std::vector<double> v(static_cast<std::size_t>(n));
  v[0] = prev;
  for (int i = 1; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = (*value_fn_)(i * h);
    scale = std::max(scale, std::abs(v[static_cast<std::size_t>(i)]));
  }
  const double slack = 1e-12 * (1.0 + scale);
  for (int i = 1; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!std::isfinite(v[k])) throw ConfigError("bound is not finite at x = " + std::to_string(i * h));
    if (v[k] < v[k - 1] - slack)
      throw ConfigError("bound is not nondecreasing near x = " + std::to_string(i * h));
    if (i + 1 < n && v[k] < 0.5 * (v[k - 1] + v[k + 1]) - slack)
      throw ConfigError("bound is not concave near x = " + std::to_string(i * h));
  }
}

double BoundFn::operator()(double x) const {
  if (x <= 0.0) return f0_ + slope0_ * x;
  switch (kind_) {
    case BoundKind::Constant: return R_;
    case BoundKind::Linear: return K_ * x;
    case BoundKind::Affine: return R_ + K_ * x;
    case BoundKind::CappedLinear: return std::min(K_ * x, R_);
    case BoundKind::Custom: return (*value_fn_)(x);
  }
  return 0.0;
}

double BoundFn::derivative(double x) const {
  if (x <= 0.0) return slope0_;
  switch (kind_) {
    case BoundKind::Constant: return 0.0;
    case BoundKind::Linear:
    case BoundKind::Affine: return K_;
    case BoundKind::CappedLinear: return x <= R_ / K_ ? K_ : 0.0;
    case BoundKind::Custom: return (*deriv_fn_)(x);
  }
  return 0.0;
}

bool BoundFn::is_zero() const noexcept {
  return kind_ == BoundKind::Constant && R_ == 0.0;
}

std::string BoundFn::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case BoundKind::Constant: os << "constant(R=" << R_ << ")"; break;
    case BoundKind::Linear: os << "linear(K=" << K_ << ")"; break;
    case BoundKind::Affine: os << "affine(K=" << K_ << ",R=" << R_ << ")"; break;
    case BoundKind::CappedLinear: os << "capped_linear(K=" << K_ << ",R=" << R_ << ")"; break;
    case BoundKind::Custom: os << label_; break;
  }
  return os.str();
}

double eval_bound(const BoundFn& f, double x) { return f(x); }
double eval_bound_deriv(const BoundFn& f, double x) { return f.derivative(x); }

}  // namespace definetti
