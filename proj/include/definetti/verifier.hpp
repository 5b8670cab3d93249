#pragma once

#include <string>
#include <vector>

#include "definetti/mc_sim.hpp"
#include "definetti/optimizer.hpp"

namespace definetti {

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct SmoothFit {
  double V0 = 0.0;
  /// V'(b*) - 1; zero in the ZeroBarrier regime.
  double slope_gap = 0.0;
  double d1_jump = 0.0;
  double d2_jump = 0.0;
};

struct NamedRule {
  std::string name;
  RateRule rule;
};

struct DominanceResult {
  std::string strategy;
  double x0 = 0.0;
  double analytic = 0.0;
  double mc = 0.0;
  double std_error = 0.0;
  double allowance = 0.0;
  /// (analytic - mc) / stderr; negative when the strategy looks better.
  double z = 0.0;
  bool pass = false;
};

struct VerificationReport {
  double hjb_sup_residual = 0.0;
  double hjb_tolerance = 0.0;
  bool selector_consistency = true;
  SmoothFit smooth_fit;
  int concavity_violations = 0;
  std::vector<Check> checks;
  std::vector<DominanceResult> dominance;

  bool overall() const;
  /// Names of failing checks, plus "dominance" if any strategy failed.
  std::vector<std::string> failures() const;
  std::string to_text() const;
};

/// sup over the grid of |(sigma^2/2) V'' + mu V' - q V + max(0, F (1 - V'))|,
/// with V from the policy's value profile. An empty grid uses the profile nodes.
double hjb_residual(const Policy& policy, const std::vector<double>& grid = {});

/// Residual of (sigma^2/2) V'' + mu V' - q V alone on the nodes in [0, b*].
double below_barrier_residual(const Policy& policy);

/// Acceptance level for hjb_residual: 10 times the combined ODE residual of
/// I_F + C2 phi_F, plus an interpolation term from dropping every other node
/// (the 2h residual at the dropped nodes, divided by 2^4 - 1).
double hjb_tolerance(const Policy& policy);

/// V(0) = 0, smooth fit, pasting jumps, concavity, slope bounds, selector
/// consistency and b* <= b_hat.
VerificationReport regularity_report(const Policy& policy);

/// psi, phi_F and I_F properties: phi_F(0) = 1 and decreasing, I_F slope in
/// [0, 1] and concave on [0, L], psi increasing from 0.
std::vector<Check> fundamentals_audit(const Fundamentals& fund);

/// Barriers {0, b_hat/4, b_hat/2, b_hat, 2 b_hat}, proportional rules c F for
/// c in {0.25, 0.5, 0.75}, and an adversarial rule paying F only below b_hat/2.
std::vector<NamedRule> default_strategies(const Policy& policy);
/// Starting points {b_hat/2, b_hat, 2 b_hat}.
std::vector<double> default_starts(const Policy& policy);

/// MC value of each strategy from each start against the analytic optimum;
/// passes when mc <= V(x0) + 3 stderr + allowance. A statistical test: passing
/// means "consistent with optimality", not verified.
std::vector<DominanceResult> dominance_suite(const Policy& policy, const std::vector<NamedRule>& strategies,
                                             const std::vector<double>& x0s, const SimConfig& cfg);

struct VerifyOptions {
  bool run_dominance = true;
  SimConfig sim;
};

/// HJB residual, regularity report and (optionally) the default dominance suite.
VerificationReport verify(const Policy& policy, const VerifyOptions& opts = {});

}  // namespace definetti
