#include "definetti/verifier.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "definetti/closed_forms.hpp"

namespace definetti {

using numerics::Jet;

namespace {

double hjb_at(const Policy& pol, double x, const Jet& j) {
  const auto& p = pol.params;
  const double F = pol.bound(x);
  return 0.5 * p.variance() * j.d2 + p.mu() * j.d1 - p.q() * j.v + std::max(0.0, F * (1.0 - j.d1));
}

Check make_check(std::string name, double value, double tol, std::string detail = {}) {
  return {std::move(name), value, tol, value <= tol, std::move(detail)};
}

double max_gap(const std::vector<double>& xs) {
  double g = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) g = std::max(g, xs[i] - xs[i - 1]);
  return g;
}

}  // namespace

double hjb_residual(const Policy& policy, const std::vector<double>& grid) {
  const auto& xs = grid.empty() ? policy.value.nodes() : grid;
  double worst = 0.0;
  for (double x : xs) worst = std::max(worst, std::abs(hjb_at(policy, x, policy.evaluate(x))));
  return worst;
}

double below_barrier_residual(const Policy& policy) {
  const auto& p = policy.params;
  double worst = 0.0;
  for (double x : policy.value.nodes()) {
    if (x > policy.b_star) break;
    const Jet j = policy.evaluate(x);
    worst = std::max(worst, std::abs(0.5 * p.variance() * j.d2 + p.mu() * j.d1 - p.q() * j.v));
  }
  return worst;
}

double hjb_tolerance(const Policy& policy) {
  const auto& dg = policy.diagnostics;
  const double ode = dg.IF_residual + std::abs(policy.C2) * dg.phi_residual;

  const auto& prof = policy.value;
  double interp = 0.0;
  if (prof.size() >= 5) {
    std::vector<double> x, v, d1, d2;
    for (std::size_t i = 0; i < prof.size(); i += 2) {
      x.push_back(prof.nodes()[i]);
      v.push_back(prof.values()[i]);
      d1.push_back(prof.d1()[i]);
      d2.push_back(prof.d2()[i]);
    }
    if (prof.size() % 2 == 0) {
      x.push_back(prof.nodes().back());
      v.push_back(prof.values().back());
      d1.push_back(prof.d1().back());
      d2.push_back(prof.d2().back());
    }
    const FnProfile coarse(x, v, d1, d2);
    for (std::size_t i = 1; i + 1 < prof.size(); i += 2) {
      const double xi = prof.nodes()[i];
      interp = std::max(interp, std::abs(hjb_at(policy, xi, coarse.eval(xi))));
    }
    interp /= 15.0;
  }
  double scale = 1.0;
  for (double val : prof.values()) scale = std::max(scale, std::abs(val));
  return 10.0 * ode + interp + 1e-10 * scale;
}

VerificationReport regularity_report(const Policy& policy) {
  VerificationReport rep;
  const auto& prof = policy.value;
  const auto& xs = prof.nodes();
  const bool positive = policy.regime == Regime::PositiveBarrier;
  const double b = policy.b_star;

  rep.smooth_fit.V0 = policy.evaluate(0.0).v;
  rep.checks.push_back(make_check("V0", std::abs(rep.smooth_fit.V0), 1e-12, "|V(0)|"));

  if (positive) {
    rep.smooth_fit.slope_gap = policy.evaluate(b).d1 - 1.0;
    rep.smooth_fit.d1_jump = policy.diagnostics.d1_jump;
    rep.smooth_fit.d2_jump = policy.diagnostics.d2_jump;
    rep.checks.push_back(make_check("smooth_fit", std::abs(rep.smooth_fit.slope_gap), 1e-8, "|V'(b*) - 1|"));
    rep.checks.push_back(make_check("d1_pasting", rep.smooth_fit.d1_jump, 1e-7, "|V'(b*-) - V'(b*+)|"));
    rep.checks.push_back(make_check("d2_pasting", rep.smooth_fit.d2_jump, 1e-5, "|V''(b*-) - V''(b*+)|"));
    const ScaleFunction psi(policy.params);
    rep.checks.push_back(
        make_check("coefficients", std::abs(policy.C1 * psi.d1(b) - 1.0), 1e-8, "|C1 psi'(b*) - 1|"));
    const double b_hat = psi.inflection();
    const double over = b > 0.0 ? b - b_hat : INFINITY;
    rep.checks.push_back(make_check("barrier_membership", std::max(0.0, over), 1e-12,
                                    fmt::format("b* = {:.12g}, b_hat = {:.12g}", b, b_hat)));
    double worst = 0.0;
    for (double x : xs) {
      if (x > b) break;
      worst = std::max(worst, 1.0 - prof.eval(x).d1);
    }
    rep.checks.push_back(make_check("slope_below_barrier", worst, 1e-9, "max of 1 - V' on [0, b*]"));
  } else {
    rep.checks.push_back(
        make_check("zero_barrier_slope", policy.evaluate(0.0).d1 - 1.0, 1e-9, "V'(0) - 1"));
  }

  double worst_d2 = -INFINITY;
  for (double d2 : prof.d2()) {
    if (d2 > 1e-8) ++rep.concavity_violations;
    worst_d2 = std::max(worst_d2, d2);
  }
  rep.checks.push_back(make_check("concavity", rep.concavity_violations, 0.0,
                                  fmt::format("max V'' = {:.3e}", worst_d2)));

  const double v0 = prof.d1().front();
  double slope_excess = 0.0;
  for (double d : prof.d1()) slope_excess = std::max({slope_excess, -d, d - v0});
  rep.checks.push_back(make_check("slope_bounds", slope_excess, 1e-9,
                                  fmt::format("V' within [0, V'(0+) = {:.6g}]", v0)));

  const double cell = max_gap(xs);
  int mismatches = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    if (positive && std::abs(x - b) <= cell) continue;
    const double gap = 1.0 - prof.d1()[i];
    const bool pays = !positive || x > b;
    if (pays ? gap < -1e-9 : gap > 1e-9) ++mismatches;
  }
  rep.selector_consistency = mismatches == 0;
  rep.checks.push_back(make_check("selector_consistency", mismatches, 0.0,
                                  "nodes where sign(1 - V') disagrees with the bang-bang branch"));
  return rep;
}

std::vector<Check> fundamentals_audit(const Fundamentals& fund) {
  std::vector<Check> out;
  const auto& phi = fund.phi_profile();
  out.push_back(make_check("phi_at_zero", std::abs(phi.eval(0.0).v - 1.0), 1e-14, "|phi_F(0) - 1|"));
  double rise = 0.0;
  for (double d : phi.d1()) rise = std::max(rise, d);
  out.push_back(make_check("phi_decreasing", rise, 0.0, "max phi_F'"));

  const auto& I = fund.IF_profile();
  double slope_out = 0.0, curv = -INFINITY;
  for (std::size_t i = 0; i < I.size(); ++i) {
    if (I.nodes()[i] < 0.0) continue;
    slope_out = std::max({slope_out, -I.d1()[i], I.d1()[i] - 1.0});
    curv = std::max(curv, I.d2()[i]);
  }
  out.push_back(make_check("IF_slope", slope_out, 1e-9, "distance of I_F' from [0, 1] on [0, L]"));
  out.push_back(make_check("IF_concave", std::max(0.0, curv), 1e-8, "max I_F'' on [0, L]"));

  double bad = 0.0;
  const double L = phi.domain_right();
  bad = std::abs(fund.psi(0.0).v);
  for (int i = 0; i <= 200; ++i) bad = std::max(bad, -fund.psi(L * i / 200.0).d1);
  out.push_back(make_check("psi_increasing", bad, 0.0, "psi(0) and min psi' on [0, L]"));
  return out;
}

std::vector<NamedRule> default_strategies(const Policy& policy) {
  const double b_hat = psi_inflection(policy.params);
  const BoundFn f = policy.bound;
  std::vector<NamedRule> out;
  const std::pair<const char*, double> barriers[] = {
      {"0", 0.0}, {"b_hat/4", 0.25 * b_hat}, {"b_hat/2", 0.5 * b_hat}, {"b_hat", b_hat}, {"2 b_hat", 2.0 * b_hat}};
  for (const auto& [label, b] : barriers)
    out.push_back({fmt::format("barrier {}", label), [f, b](double u) { return u > b ? f(u) : 0.0; }});
  for (double c : {0.25, 0.5, 0.75})
    out.push_back({fmt::format("proportional {}", c), [f, c](double u) { return c * f(u); }});
  const double edge = 0.5 * b_hat;
  out.push_back({"adversarial", [f, edge](double u) { return u < edge ? f(u) : 0.0; }});
  return out;
}

std::vector<double> default_starts(const Policy& policy) {
  const double b_hat = psi_inflection(policy.params);
  return {0.5 * b_hat, b_hat, 2.0 * b_hat};
}

std::vector<DominanceResult> dominance_suite(const Policy& policy, const std::vector<NamedRule>& strategies,
                                             const std::vector<double>& x0s, const SimConfig& cfg) {
  std::vector<DominanceResult> out;
  const auto& p = policy.params;
  const double slope0 = std::max(policy.evaluate(0.0).d1, 0.0);
  for (const auto& s : strategies) {
    for (double x0 : x0s) {
      DominanceResult r;
      r.strategy = s.name;
      r.x0 = x0;
      r.analytic = policy.evaluate(x0).v;
      const auto est = evaluate_strategy(p, policy.bound, s.rule, x0, cfg);
      r.mc = est.mean;
      r.std_error = est.std_error;
      r.allowance = discretization_allowance(cfg, p.sigma(), slope0, policy.bound(x0) + p.mu()) +
                    est.discount_tail_bound;
      r.z = est.z_score(r.analytic);
      r.pass = r.mc <= r.analytic + 3.0 * r.std_error + r.allowance;
      out.push_back(std::move(r));
    }
  }
  return out;
}

VerificationReport verify(const Policy& policy, const VerifyOptions& opts) {
  VerificationReport rep = regularity_report(policy);
  rep.hjb_sup_residual = hjb_residual(policy);
  rep.hjb_tolerance = hjb_tolerance(policy);
  rep.checks.insert(rep.checks.begin(),
                    make_check("hjb_residual", rep.hjb_sup_residual, rep.hjb_tolerance,
                               "sup |(s^2/2) V'' + mu V' - q V + max(0, F (1 - V'))| on the value grid"));
  if (opts.run_dominance)
    rep.dominance = dominance_suite(policy, default_strategies(policy), default_starts(policy), opts.sim);
  return rep;
}

bool VerificationReport::overall() const { return failures().empty(); }

std::vector<std::string> VerificationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.pass) out.push_back(c.name);
  for (const auto& d : dominance)
    if (!d.pass) {
      out.push_back("dominance");
      break;
    }
  return out;
}

std::string VerificationReport::to_text() const {
  std::string s;
  for (const auto& c : checks)
    s += fmt::format("{:<22} {}  value {:.3e}  tol {:.3e}  {}\n", c.name, c.pass ? "PASS" : "FAIL", c.value,
                     c.tolerance, c.detail);
  if (!dominance.empty()) {
    s += "dominance (statistical: PASS means consistent with optimality, not verified)\n";
    for (const auto& d : dominance)
      s += fmt::format("  {:<18} x0 {:<8.4g} V {:.6f}  mc {:.6f} +- {:.2e}  allowance {:.2e}  z {:+.2f}  {}\n",
                       d.strategy, d.x0, d.analytic, d.mc, d.std_error, d.allowance, d.z,
                       d.pass ? "PASS" : "FAIL");
  }
  s += fmt::format("overall {}\n", overall() ? "PASS" : "FAIL");
  return s;
}

}  // namespace definetti
