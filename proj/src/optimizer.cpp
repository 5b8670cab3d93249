#include "definetti/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "definetti/errors.hpp"

namespace definetti {

using numerics::Jet;

namespace {

SolveConfig widen_for(const ModelParams& p, SolveConfig cfg) {
  cfg.x_query = std::max(cfg.x_query, 4.0 * psi_inflection(p));
  return cfg;
}

std::vector<double> with_node(const std::vector<double>& grid, double b) {
  std::vector<double> xs = grid;
  if (b > 0.0) xs.push_back(b);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

void check_grid(const Fundamentals& fund, const std::vector<double>& grid) {
  if (grid.size() < 2) throw DomainError("value grid needs at least two points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0)
      throw DomainError(fmt::format("value grid point {} is not a finite x >= 0", grid[i]));
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw DomainError("value grid must be strictly increasing");
  }
  const double right = std::min(fund.phi_profile().domain_right(), fund.IF_profile().domain_right());
  if (grid.back() > right)
    throw DomainError(fmt::format("value grid reaches x = {} beyond the solved domain [0, {}]",
                                  grid.back(), right));
}

// V = C1 psi on [0, b], I_F + C2 phi_F on (b, inf); b = 0 gives the pure
// second branch.
BarrierValue assemble(const Fundamentals& fund, double b, double C1, double C2,
                      const std::vector<double>& grid) {
  const auto xs = with_node(grid, b);
  check_grid(fund, xs);
  std::vector<double> v(xs.size()), d1(xs.size()), d2(xs.size());
  auto upper = [&](double x) {
    const Jet I = fund.IF(x);
    const Jet ph = fund.phi(x);
    return Jet{I.v + C2 * ph.v, I.d1 + C2 * ph.d1, I.d2 + C2 * ph.d2};
  };
  auto lower = [&](double x) {
    const Jet s = fund.psi(x);
    return Jet{C1 * s.v, C1 * s.d1, C1 * s.d2};
  };
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Jet j = (b > 0.0 && xs[i] <= b) ? lower(xs[i]) : upper(xs[i]);
    v[i] = j.v;
    d1[i] = j.d1;
    d2[i] = j.d2;
  }
  BarrierValue out;
  out.b = b;
  out.C1_b = C1;
  out.C2_b = C2;
  if (b > 0.0) {
    const Jet l = lower(b);
    const Jet u = upper(b);
    out.d1_jump = std::abs(l.d1 - u.d1);
    out.d2_jump = std::abs(l.d2 - u.d2);
  }
  out.value = FnProfile(xs, std::move(v), std::move(d1), std::move(d2));
  return out;
}

}  // namespace

Fundamentals::Fundamentals(const ModelParams& p, const BoundFn& f, const SolveConfig& cfg)
    : p_(p), f_(f), psi_(p), b_hat_(psi_inflection(p)) {
  const SolveConfig wide = widen_for(p, cfg);
  phi_ = solve_phi_F(p, f, wide);
  I_ = solve_I_F(p, f, wide);
}

Jet Fundamentals::psi(double x) const { return {psi_.value(x), psi_.d1(x), psi_.d2(x)}; }

double Fundamentals::regime_statistic() const {
  const Jet I0 = I_.eval(0.0);
  return I0.d1 - I0.v * phi_.eval(0.0).d1;
}

std::string to_string(Regime r) {
  return r == Regime::ZeroBarrier ? "ZeroBarrier" : "PositiveBarrier";
}

Jet Policy::evaluate(double x) const { return value.eval(x); }

bool regime_test(const Fundamentals& fund) {
  return fund.regime_statistic() <= 1.0 + kBorderlineBand;
}

bool regime_test(const ModelParams& p, const BoundFn& f, const SolveConfig& cfg) {
  return regime_test(Fundamentals(p, f, cfg));
}

double barrier_gap(const Fundamentals& fund, double b) {
  const Jet I = fund.IF(b);
  const Jet ph = fund.phi(b);
  const Jet s = fund.psi(b);
  const double ratio = ph.v / ph.d1;
  const double g = I.v - I.d1 * ratio;
  const double h = s.v / s.d1 - ratio;
  return g - h;
}

numerics::RootScan find_bstar(const Fundamentals& fund) {
  const double b_hat = fund.b_hat();
  const double lo = 1e-8 * b_hat;
  auto gap = [&](double b) { return barrier_gap(fund, b); };
  const double g_lo = gap(lo);
  if (!(g_lo > 0.0))
    throw InconsistencyError(fmt::format(
        "find_bstar: g > h fails at the left endpoint b = {} (g - h = {})", lo, g_lo));
  const double g_hi = gap(b_hat);
  if (g_hi > 0.0)
    throw InconsistencyError(fmt::format(
        "find_bstar: g <= h fails at the right endpoint b_hat = {} (g - h = {})", b_hat, g_hi));
  auto scan = numerics::smallest_root(gap, lo, b_hat, 512);
  const Jet I = fund.IF(scan.root);
  const Jet ph = fund.phi(scan.root);
  const double g = I.v - I.d1 * ph.v / ph.d1;
  if (std::abs(scan.residual) > 1e-10 * std::max(1.0, std::abs(g)))
    throw NumericalError(
        fmt::format("find_bstar: root residual {} at b = {} exceeds 1e-10", scan.residual, scan.root));
  return scan;
}

double find_bstar(const ModelParams& p, const BoundFn& f, const SolveConfig& cfg) {
  return find_bstar(Fundamentals(p, f, cfg)).root;
}

std::pair<double, double> barrier_coefficients(const Fundamentals& fund, double b) {
  if (b == 0.0) return {0.0, -fund.IF(0.0).v};
  const Jet I = fund.IF(b);
  const Jet ph = fund.phi(b);
  const Jet s = fund.psi(b);
  const double w = s.d1 * ph.v - s.v * ph.d1;
  if (!(w > 0.0))
    throw InconsistencyError(
        fmt::format("value_at_barrier: psi' phi - psi phi' = {} is not positive at b = {}", w, b));
  return {(I.d1 * ph.v - I.v * ph.d1) / w, (I.d1 * s.v - I.v * s.d1) / w};
}

BarrierValue value_at_barrier(const Fundamentals& fund, double b, const std::vector<double>& grid) {
  if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("value_at_barrier: b must be >= 0");
  const auto [C1, C2] = barrier_coefficients(fund, b);
  return assemble(fund, b, C1, C2, grid);
}

BarrierValue value_at_barrier(const ModelParams& p, const BoundFn& f, double b,
                              const std::vector<double>& grid, const SolveConfig& cfg) {
  SolveConfig c = cfg;
  if (!grid.empty()) c.x_query = std::max(c.x_query, std::max(grid.back(), b));
  return value_at_barrier(Fundamentals(p, f, c), b, grid);
}

std::vector<double> default_value_grid(const ModelParams& p, double x_query, int points) {
  return numerics::linspace(0.0, std::max(x_query, 4.0 * psi_inflection(p)), points);
}

Policy solve(const Fundamentals& fund, const std::vector<double>& grid) {
  Policy pol;
  pol.params = fund.params();
  pol.bound = fund.bound();
  auto& dg = pol.diagnostics;
  dg.regime_statistic = fund.regime_statistic();
  dg.borderline = std::abs(dg.regime_statistic - 1.0) <= kBorderlineBand;
  dg.b_hat = fund.b_hat();
  dg.phi_residual = fund.phi_profile().meta().residual;
  dg.IF_residual = fund.IF_profile().meta().residual;
  dg.phi_mesh_h = fund.phi_profile().meta().mesh_h;
  dg.IF_mesh_h = fund.IF_profile().meta().mesh_h;
  dg.truncation_L = fund.phi_profile().domain_right();
  dg.kinked_bound = fund.bound().kinked();

  if (regime_test(fund)) {
    auto bv = value_at_barrier(fund, 0.0, grid);
    pol.regime = Regime::ZeroBarrier;
    pol.C2 = bv.C2_b;
    pol.value = std::move(bv.value);
    return pol;
  }

  const auto scan = find_bstar(fund);
  const double b = scan.root;
  const double C1 = 1.0 / fund.psi(b).d1;
  const double C2 = (1.0 - fund.IF(b).d1) / fund.phi(b).d1;
  if (!(C1 > 0.0) || C2 > 1e-12)
    throw InconsistencyError(fmt::format("solve: expected C2 <= 0 < C1, got C1 = {}, C2 = {}", C1, C2));
  auto bv = assemble(fund, b, C1, C2, grid);
  dg.sign_changes = scan.sign_changes;
  dg.root_residual = scan.residual;
  dg.d1_jump = bv.d1_jump;
  dg.d2_jump = bv.d2_jump;
  if (bv.d2_jump > 1e-5)
    throw NumericalError(fmt::format(
        "solve: second-derivative jump {} at b* = {} exceeds 1e-5 (phi residual {}, I_F residual {})",
        bv.d2_jump, b, dg.phi_residual, dg.IF_residual));
  pol.regime = Regime::PositiveBarrier;
  pol.b_star = b;
  pol.C1 = C1;
  pol.C2 = C2;
  pol.value = std::move(bv.value);
  return pol;
}

Policy solve(const ModelParams& p, const BoundFn& f, std::vector<double> grid, SolveConfig cfg) {
  if (grid.empty()) grid = default_value_grid(p);
  cfg.x_query = std::max(cfg.x_query, grid.back());
  return solve(Fundamentals(p, f, cfg), grid);
}

}  // namespace definetti
