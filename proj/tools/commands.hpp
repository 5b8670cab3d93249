#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace definetti::cli {

enum ExitCode { kOk = 0, kConfigError = 2, kSolverError = 3, kVerifyFailed = 4 };

struct SimulateRequest {
  /// "b_star", "b_hat" or a number; ignored when `rule` is set.
  std::string barrier;
  /// "proportional:c" for the rule u = c F(u).
  std::string rule;
  std::vector<double> x0s;
};

/// Writes policy.json and value.csv to out_dir.
int cmd_solve(const ProblemConfig& cfg, const std::optional<GridSpec>& grid, const std::string& out_dir,
              std::ostream& out, std::ostream& err);

/// Verifies the artifacts against the config; exit 4 names the failing checks.
int cmd_verify(const ProblemConfig& cfg, const std::string& policy_path, bool dominance,
               const std::string& report_path, std::ostream& out, std::ostream& err);

/// One CSV row per starting point.
int cmd_simulate(const ProblemConfig& cfg, const SimulateRequest& req, std::ostream& csv, std::ostream& err);

/// Columns x, phi_ode, phi_closed, IF_ode, IF_closed, V, V_mc, V_mc_stderr;
/// closed-form cells are empty without a closed form, MC cells without `mc`.
int cmd_compare(const ProblemConfig& cfg, const std::optional<GridSpec>& grid, bool mc, std::ostream& csv,
                std::ostream& summary, std::ostream& err);

/// Runs fn, mapping exceptions to exit codes 2 (input) or 3 (solver).
int guarded(const std::function<int()>& fn, std::ostream& err);

}  // namespace definetti::cli
