#include "definetti/ode_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "definetti/errors.hpp"

namespace definetti {

using numerics::Jet;

// ---------------------------------------------------------------------------
// FnProfile

FnProfile::FnProfile(std::vector<double> nodes, std::vector<double> values, std::vector<double> d1,
                     std::vector<double> d2, ProfileMeta meta, std::vector<double> values_lo)
    : nodes_(std::move(nodes)),
      values_(std::move(values)),
      d1_(std::move(d1)),
      d2_(std::move(d2)),
      meta_(std::move(meta)),
      values_lo_(std::move(values_lo)) {
  const std::size_t n = nodes_.size();
  if (n < 2 || values_.size() != n || d1_.size() != n || d2_.size() != n)
    throw DomainError("FnProfile: arrays must have equal length >= 2");
  if (!values_lo_.empty() && values_lo_.size() != n)
    throw DomainError("FnProfile: low-order value parts must match the node count");
  for (std::size_t i = 1; i < n; ++i)
    if (!(nodes_[i] > nodes_[i - 1])) throw DomainError("FnProfile: nodes must be strictly increasing");
}

FnProfile FnProfile::constant(double value, double left, double right) {
  const auto xs = numerics::linspace(left, right, 65);
  return FnProfile(xs, std::vector<double>(xs.size(), value), std::vector<double>(xs.size(), 0.0),
                   std::vector<double>(xs.size(), 0.0));
}

Jet FnProfile::eval(double x) const {
  if (empty()) throw DomainError("FnProfile: empty profile");
  if (!(x >= nodes_.front() && x <= nodes_.back()))
    throw DomainError(
        fmt::format("FnProfile: x = {} outside [{}, {}]", x, nodes_.front(), nodes_.back()));
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
  if (j == nodes_.size()) j = nodes_.size() - 1;
  const std::size_t i = j - 1;
  if (x == nodes_[i]) return {values_[i], d1_[i], d2_[i]};
  if (x == nodes_[j]) return {values_[j], d1_[j], d2_[j]};
  return eval_cell(i, x);
}

Jet FnProfile::eval_cell(std::size_t i, double x) const {
  const std::size_t j = i + 1;
  double dv = values_[j] - values_[i];
  if (!values_lo_.empty()) dv += values_lo_[j] - values_lo_[i];
  return numerics::quintic_hermite(nodes_[i], {values_[i], d1_[i], d2_[i]}, nodes_[j],
                                   {values_[j], d1_[j], d2_[j]}, x, dv);
}

// ---------------------------------------------------------------------------
// SolveConfig

void SolveConfig::validate() const {
  if (!(truncation_L >= 0.0)) throw ConfigError("truncation_L must be >= 0 (0 = automatic)");
  if (mesh_n < 64) throw ConfigError("mesh_n must be >= 64");
  if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
  if (refine_max < 0) throw ConfigError("refine_max must be >= 0");
  if (!(x_query > 0.0)) throw ConfigError("x_query must be > 0");
}

double frozen_decay_rate(const ModelParams& p, double F_level) {
  const double c = p.mu() - F_level;
  return (c + std::sqrt(c * c + 2.0 * p.q() * p.variance())) / p.variance();
}

namespace {

constexpr std::size_t kMaxNodes = 40'000'000;

// Uniform grid x_i = (i - i0) h, i = 0..n, so that 0 is a node. A kink at
// kink_index * h is also a node when kink_index >= 0.
struct Grid {
  double h;
  std::size_t i0;
  std::size_t n;
  long kink_index = -1;

  double x(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(i0)) * h;
  }
  Grid refined() const {
    return {0.5 * h, 2 * i0, 2 * n, kink_index >= 0 ? 2 * kink_index : -1};
  }
};

Grid make_grid(double M, double L, std::optional<double> kink, double h_target) {
  Grid g{h_target, 0, 0};
  if (kink) {
    const double m = std::ceil(*kink / h_target - 1e-9);
    g.h = *kink / m;
  }
  g.i0 = static_cast<std::size_t>(std::ceil(M / g.h - 1e-9));
  const auto right = static_cast<std::size_t>(std::ceil(L / g.h - 1e-9));
  g.n = g.i0 + right;
  if (kink) g.kink_index = static_cast<long>(g.i0) + std::lround(*kink / g.h);
  if (2 * g.n + 1 > kMaxNodes)
    throw NumericalError(fmt::format("ODE mesh would exceed {} nodes", kMaxNodes));
  return g;
}

// Problem on [-M, L]: (sigma^2/2) f'' + (mu - F) f' - q f = rhs with rhs 0 or -F.
struct Bvp {
  const ModelParams* p;
  const BoundFn* f;
  bool inhomogeneous;
  bool left_dirichlet;  // else Neumann
  double left_value;    // Dirichlet value or Neumann slope
  bool right_robin;     // else Neumann
  // Robin rate or Neumann slope, from the right endpoint.
  double right_value(double L) const {
    if (right_robin) return frozen_decay_rate(*p, (*f)(L));
    const double k = f->derivative(L);
    return k / (p->q() + k);
  }
  double rhs(double x) const { return inhomogeneous ? -(*f)(x) : 0.0; }
};

using Real = long double;

// Coefficients of size sigma^2/h^2 must cancel down to O(q) in every row, so
// the system is assembled and solved in extended precision.
std::vector<Real> discrete_solve(const Bvp& bvp, const Grid& g) {
  const std::size_t N = g.n + 1;
  const Real var = bvp.p->variance();
  const Real q = bvp.p->q();
  const Real mu = bvp.p->mu();
  const Real h = g.h;
  const Real a2 = var / (2 * h * h);
  std::vector<Real> lo(N), di(N), up(N), r(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double x = g.x(i);
    const Real b = mu - static_cast<Real>((*bvp.f)(x));
    lo[i] = a2 - b / (2 * h);
    di[i] = -2 * a2 - q;
    up[i] = a2 + b / (2 * h);
    r[i] = bvp.rhs(x);
  }
  if (bvp.left_dirichlet) {
    di[0] = 1;
    up[0] = 0;
    r[0] = bvp.left_value;
  } else {
    // Ghost f_{-1} = f_1 - 2h s.
    r[0] += 2 * h * static_cast<Real>(bvp.left_value) * lo[0];
    up[0] += lo[0];
  }
  const Real rv = bvp.right_value(g.x(g.n));
  if (bvp.right_robin) {
    // Ghost f_{N+1} = f_{N-1} - 2h lambda f_N.
    di[N - 1] -= 2 * h * rv * up[N - 1];
  } else {
    // Ghost f_{N+1} = f_{N-1} + 2h s.
    r[N - 1] -= 2 * h * rv * up[N - 1];
  }
  lo[N - 1] += up[N - 1];
  return numerics::solve_tridiagonal(std::move(lo), std::move(di), std::move(up), std::move(r));
}

constexpr int kStencil = 7;

// First-derivative weights (unit spacing) of the Lagrange interpolant through
// kStencil equispaced points, evaluated at each of the points.
std::array<std::array<Real, kStencil>, kStencil> d1_weights() {
  std::array<std::array<Real, kStencil>, kStencil> w{};
  for (int p = 0; p < kStencil; ++p)
    for (int k = 0; k < kStencil; ++k) {
      Real sum = 0;
      for (int m = 0; m < kStencil; ++m) {
        if (m == k) continue;
        Real prod = Real(1) / (k - m);
        for (int l = 0; l < kStencil; ++l)
          if (l != k && l != m) prod *= static_cast<Real>(p - l) / (k - l);
        sum += prod;
      }
      w[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)] = sum;
    }
  return w;
}

// d1 by sixth-order stencils that never straddle the kink node.
std::vector<Real> stencil_d1(const std::vector<Real>& v, const Grid& g) {
  static const auto weights = d1_weights();
  constexpr long half = kStencil / 2;
  const long N = static_cast<long>(v.size());
  std::vector<Real> d(v.size());
  for (long i = 0; i < N; ++i) {
    long seg_lo = 0, seg_hi = N - 1;
    if (g.kink_index > 0 && g.kink_index < N - 1) {
      if (i <= g.kink_index)
        seg_hi = g.kink_index;
      else
        seg_lo = g.kink_index;
    }
    const long j = std::clamp(i - half, seg_lo, std::max(seg_lo, seg_hi - (kStencil - 1)));
    const auto& w = weights[static_cast<std::size_t>(i - j)];
    Real s = 0;
    for (long k = 0; k < kStencil; ++k)
      s += w[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(j + k)];
    d[static_cast<std::size_t>(i)] = s / static_cast<Real>(g.h);
  }
  return d;
}

FnProfile assemble(const Bvp& bvp, const Grid& g, const std::vector<Real>& v) {
  const std::size_t n = v.size();
  std::vector<double> xs(n), vals(n), lo(n), d1(n), d2(n);
  const auto dv = stencil_d1(v, g);
  const Real var = bvp.p->variance();
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = g.x(i);
    Real slope = dv[i];
    if (i == 0 && !bvp.left_dirichlet) slope = bvp.left_value;
    if (i == n - 1 && !bvp.right_robin) slope = bvp.right_value(xs[i]);
    const Real b = bvp.p->mu() - static_cast<Real>((*bvp.f)(xs[i]));
    vals[i] = static_cast<double>(v[i]);
    lo[i] = static_cast<double>(v[i] - static_cast<Real>(vals[i]));
    d1[i] = static_cast<double>(slope);
    d2[i] = static_cast<double>(2 * (bvp.rhs(xs[i]) - b * slope + bvp.p->q() * v[i]) / var);
  }
  ProfileMeta meta;
  meta.truncation_L = xs.back();
  meta.truncation_M = -xs.front();
  meta.mesh_h = g.h;
  return FnProfile(std::move(xs), std::move(vals), std::move(d1), std::move(d2), std::move(meta),
                   std::move(lo));
}

// Richardson-extrapolated solution on the nodes of g.
FnProfile richardson_profile(const Bvp& bvp, const Grid& g) {
  const auto coarse = discrete_solve(bvp, g);
  const auto fine = discrete_solve(bvp, g.refined());
  std::vector<Real> v(coarse.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (4 * fine[2 * i] - coarse[i]) / 3;
  return assemble(bvp, g, v);
}

std::optional<double> aligned_kink(const BoundFn& f) {
  if (f.kinks().empty()) return std::nullopt;
  return f.kinks().front();
}

// Largest step keeping the cell Peclet number |b| h / sigma^2 below 1/2.
double peclet_step(const ModelParams& p, const BoundFn& f, double M, double L) {
  const double b = std::max({std::abs(p.mu() - f(-M)), std::abs(p.mu() - f(L)),
                             std::abs(p.mu() - f(0.0)), 1e-300});
  return 0.5 * p.variance() / b;
}

struct Domain {
  double M, L;
};

// Mesh adaptation on a fixed domain. The first solve on a probe mesh yields a
// residual estimate r ~ C h^4, from which the working step is predicted, so
// the accepted step varies continuously with tol. The residual is measured on
// [-M/2, L/2], the region certified by the truncation guard; the far-field
// conditions leave thin boundary layers outside it.
FnProfile adapt_mesh(const Bvp& bvp, const SolveConfig& cfg, Domain d, std::vector<double>& history) {
  const ModelParams& p = *bvp.p;
  const auto kink = aligned_kink(*bvp.f);
  const double rate = (std::abs(p.mu()) + std::sqrt(p.mu() * p.mu() + 2.0 * p.q() * p.variance())) /
                      p.variance();
  const double h_max = std::min({(d.M + d.L) / (cfg.mesh_n - 1), peclet_step(p, *bvp.f, d.M, d.L),
                                 1.0 / (10.0 * rate)});
  const double h_probe = std::min(h_max, 1.0 / (40.0 * rate));

  auto run = [&](double h) {
    Grid g{};
    try {
      g = make_grid(d.M, d.L, kink, h);
    } catch (const NumericalError& e) {
      throw NumericalError(e.what(), history);
    }
    auto prof = richardson_profile(bvp, g);
    const double r = gamma_midpoint_residual(p, *bvp.f, prof, bvp.inhomogeneous, -0.5 * d.M, 0.5 * d.L);
    history.push_back(r);
    return std::pair{std::move(prof), r};
  };

  auto [prof, r] = run(h_probe);
  const double factor0 = r > 0.0 ? std::pow(0.5 * cfg.tol / r, 0.25) : 4.0;
  double h = std::min(h_max, prof.meta().mesh_h * std::min(factor0, 4.0));
  std::tie(prof, r) = run(h);
  for (int round = 0; !(r <= cfg.tol) && round < cfg.refine_max; ++round) {
    const double previous = r;
    h *= std::clamp(std::pow(0.5 * cfg.tol / r, 0.25), 0.25, 0.8);
    std::tie(prof, r) = run(h);
    if (r > previous)
      throw NumericalError(fmt::format("ODE solve: residual stagnated at {:.3g} above tol {:.3g} "
                                       "(rounding floor of the mesh)",
                                       previous, cfg.tol),
                           history);
  }
  if (!(r <= cfg.tol))
    throw NumericalError(fmt::format("ODE solve did not reach tol {:.3g} after {} refinements",
                                     cfg.tol, cfg.refine_max),
                         history);
  ProfileMeta meta = prof.meta();
  meta.residual = r;
  return prof.with_meta(std::move(meta));
}

// Sup of |a - b| over common nodes with x in [from, to]; both profiles share h
// and the node 0.
double max_change(const FnProfile& a, const FnProfile& b, double from, double to) {
  const double h = a.meta().mesh_h;
  const auto ia0 = static_cast<long>(std::lround(a.meta().truncation_M / h));
  const auto ib0 = static_cast<long>(std::lround(b.meta().truncation_M / h));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a.nodes()[i];
    if (x < from || x > to) continue;
    const long j = static_cast<long>(i) - ia0 + ib0;
    if (j < 0 || j >= static_cast<long>(b.size())) continue;
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[static_cast<std::size_t>(j)]));
  }
  return worst;
}

FnProfile solve_with_guard(const Bvp& bvp, const SolveConfig& cfg, Domain d) {
  std::vector<double> history;
  for (int round = 0; round <= cfg.refine_max; ++round) {
    auto prof = adapt_mesh(bvp, cfg, d, history);
    const double h = prof.meta().mesh_h;
    const auto kink = aligned_kink(*bvp.f);
    const Domain big{2.0 * d.M, 2.0 * d.L};
    const auto wide = richardson_profile(bvp, make_grid(big.M, big.L, kink, h));
    const double change = max_change(prof, wide, 0.0, 0.5 * prof.meta().truncation_L);
    if (change < cfg.tol) {
      ProfileMeta meta = prof.meta();
      meta.truncation_change = change;
      meta.residual_history = history;
      return prof.with_meta(std::move(meta));
    }
    history.push_back(change);
    d = big;
  }
  throw NumericalError(
      fmt::format("ODE solve: truncation guard failed after doubling the domain {} times",
                  cfg.refine_max),
      history);
}

double default_L(const ModelParams& p, const BoundFn& f, const SolveConfig& cfg) {
  if (cfg.truncation_L > 0.0) return cfg.truncation_L;
  double L = std::max(2.0 * cfg.x_query, cfg.x_query + 10.0 * p.sigma() / std::sqrt(2.0 * p.q()));
  for (double k : f.kinks()) L = std::max(L, 2.0 * k);
  return L;
}

}  // namespace

FnProfile solve_phi_F(const ModelParams& p, const BoundFn& f, const SolveConfig& cfg) {
  cfg.validate();
  const Bvp bvp{&p, &f, false, true, 1.0, true};
  auto prof = solve_with_guard(bvp, cfg, {0.0, default_L(p, f, cfg)});
  const auto& v = prof.values();
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1]) && v[i - 1] > 1e-250)
      throw InconsistencyError(
          fmt::format("solve_phi_F: profile not strictly decreasing at x = {}", prof.nodes()[i]));
    if (!(v[i] >= 0.0)) throw InconsistencyError("solve_phi_F: negative value");
  }
  return prof;
}

FnProfile solve_I_F(const ModelParams& p, const BoundFn& f, const SolveConfig& cfg) {
  cfg.validate();
  const double L = default_L(p, f, cfg);
  if (f.is_constant()) return FnProfile::constant(f.value_at_zero() / p.q(), 0.0, L);
  const double k0 = f.slope_at_zero();
  const double M = cfg.truncation_M >= 0.0
                       ? cfg.truncation_M
                       : 10.0 * p.sigma() / std::sqrt(2.0 * p.q()) + 5.0 * p.mu() / std::max(p.q(), k0);
  if (!(M > 0.0)) throw ConfigError("truncation_M must be > 0 for a non-constant bound");
  const Bvp bvp{&p, &f, true, false, k0 / (p.q() + k0), false};
  auto prof = solve_with_guard(bvp, cfg, {M, L});
  const double slack = cfg.tol;
  for (std::size_t i = 0; i < prof.size(); ++i) {
    if (prof.nodes()[i] < 0.0) continue;
    const double s = prof.d1()[i];
    if (s < -slack || s > 1.0 + slack)
      throw InconsistencyError(
          fmt::format("solve_I_F: slope {} outside [0, 1] at x = {}", s, prof.nodes()[i]));
  }
  return prof;
}

double gamma_residual(const ModelParams& p, const BoundFn& f, const FnProfile& profile,
                      bool rhs_is_minus_F) {
  if (profile.empty()) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double x = profile.nodes()[i];
    const double F = f(x);
    const double g = 0.5 * p.variance() * profile.d2()[i] + (p.mu() - F) * profile.d1()[i] -
                     p.q() * profile.values()[i];
    worst = std::max(worst, std::abs(g - (rhs_is_minus_F ? -F : 0.0)));
  }
  return worst;
}

double gamma_midpoint_residual(const ModelParams& p, const BoundFn& f, const FnProfile& profile,
                               bool rhs_is_minus_F, double from, double to) {
  double worst = 0.0;
  const auto& x = profile.nodes();
  for (std::size_t i = 0; i + 1 < profile.size(); ++i) {
    const double m = 0.5 * (x[i] + x[i + 1]);
    if (m < from || m > to) continue;
    const Jet j = profile.eval_cell(i, m);
    const double F = f(m);
    const double g = 0.5 * p.variance() * j.d2 + (p.mu() - F) * j.d1 - p.q() * j.v;
    worst = std::max(worst, std::abs(g - (rhs_is_minus_F ? -F : 0.0)));
  }
  return worst;
}

}  // namespace definetti
