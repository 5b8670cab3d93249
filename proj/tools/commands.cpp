#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <ostream>

#include <fmt/format.h>

#include "artifacts.hpp"
#include "definetti/closed_forms.hpp"
#include "definetti/errors.hpp"
#include "definetti/numerics.hpp"

namespace definetti::cli {

namespace {

std::string cell(double v) { return fmt::format("{:.17g}", v); }

double parse_barrier(const ProblemConfig& cfg, const std::string& spec) {
  if (spec == "b_hat") return psi_inflection(cfg.params);
  if (spec == "b_star") return solve(cfg.params, cfg.bound.build(), {}, cfg.solve).b_star;
  std::size_t used = 0;
  double b = 0.0;
  try {
    b = std::stod(spec, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != spec.size() || !(b >= 0.0) || !std::isfinite(b))
    throw ConfigError(fmt::format("barrier: expected b_star, b_hat or a number >= 0, got \"{}\"", spec));
  return b;
}

}  // namespace

int guarded(const std::function<int()>& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "solver failure: " << e.what() << "\n";
    if (!e.history().empty()) {
      err << "history:";
      for (double h : e.history()) err << " " << cell(h);
      err << "\n";
    }
    return kSolverError;
  } catch (const InconsistencyError& e) {
    err << "solver failure (inconsistency): " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return kSolverError;
  }
}

int cmd_solve(const ProblemConfig& cfg, const std::optional<GridSpec>& grid, const std::string& out_dir,
              std::ostream& out, std::ostream&) {
  const auto xs = resolve_grid(cfg, grid);
  const Policy pol = solve(cfg.params, cfg.bound.build(), xs, cfg.solve);
  write_policy(pol, cfg.bound, out_dir);
  out << fmt::format("regime {}  b* = {:.12g}  C1 = {:.12g}  C2 = {:.12g}{}\n", to_string(pol.regime), pol.b_star,
                     pol.C1, pol.C2, pol.diagnostics.borderline ? "  (borderline)" : "");
  out << fmt::format("wrote {}/policy.json and {}/value.csv\n", out_dir, out_dir);
  return kOk;
}

int cmd_verify(const ProblemConfig& cfg, const std::string& policy_path, bool dominance,
               const std::string& report_path, std::ostream& out, std::ostream& err) {
  const Policy pol = read_policy(policy_path, cfg);
  VerifyOptions opts;
  opts.run_dominance = dominance;
  opts.sim = cfg.sim;
  const VerificationReport rep = verify(pol, opts);
  out << rep.to_text();
  if (!report_path.empty()) write_file(report_path, report_to_json(rep).dump(2) + "\n");
  if (rep.overall()) return kOk;
  std::string names;
  for (const auto& f : rep.failures()) names += (names.empty() ? "" : ", ") + f;
  err << "verification failed: " << names << "\n";
  return kVerifyFailed;
}

int cmd_simulate(const ProblemConfig& cfg, const SimulateRequest& req, std::ostream& csv, std::ostream&) {
  const BoundFn f = cfg.bound.build();
  std::string label;
  std::function<MCEstimate(double)> run;
  if (!req.rule.empty()) {
    const std::string prefix = "proportional:";
    if (req.rule.rfind(prefix, 0) != 0) throw ConfigError(fmt::format("rule: unknown rule \"{}\"", req.rule));
    const std::string frac = req.rule.substr(prefix.size());
    std::size_t used = 0;
    double c = -1.0;
    try {
      c = std::stod(frac, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != frac.size() || !(c >= 0.0 && c <= 1.0))
      throw ConfigError(fmt::format("rule: proportional fraction must lie in [0, 1], got \"{}\"", frac));
    label = fmt::format("proportional {}", cell(c));
    run = [&, c](double x0) {
      return evaluate_strategy(cfg.params, f, [&f, c](double u) { return c * f(u); }, x0, cfg.sim);
    };
  } else {
    const double b = parse_barrier(cfg, req.barrier);
    label = fmt::format("barrier {}", cell(b));
    run = [&, b](double x0) { return estimate_value(cfg.params, f, b, x0, cfg.sim); };
  }
  for (double x0 : req.x0s)
    if (!(x0 >= 0.0)) throw ConfigError(fmt::format("x0: must be >= 0, got {}", x0));
  csv << "x0,strategy,estimate,stderr,n_paths,dt,horizon,seed,antithetic\n";
  for (double x0 : req.x0s) {
    const auto e = run(x0);
    csv << fmt::format("{},{},{},{},{},{},{},{},{}\n", cell(x0), label, cell(e.mean), cell(e.std_error), e.n_paths,
                       cell(e.dt), cell(e.horizon), e.seed, e.antithetic ? 1 : 0);
  }
  return kOk;
}

int cmd_compare(const ProblemConfig& cfg, const std::optional<GridSpec>& grid, bool mc, std::ostream& csv,
                std::ostream& summary, std::ostream& err) {
  const BoundFn f = cfg.bound.build();
  std::vector<double> xs;
  if (grid) {
    xs = resolve_grid(cfg, grid);
  } else {
    xs = numerics::linspace(0.0, 8.0, 17);
  }
  const auto& variant = cfg.bound.variant;
  const double K = cfg.bound.K, R = variant == "linear" ? 0.0 : cfg.bound.R;
  if (variant == "capped_linear") {
    xs.push_back(R / K);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  }

  SolveConfig sc = cfg.solve;
  sc.x_query = std::max(sc.x_query, xs.back());
  const Fundamentals fund(cfg.params, f, sc);
  auto vgrid = default_value_grid(cfg.params, xs.back());
  vgrid.insert(vgrid.end(), xs.begin(), xs.end());
  std::sort(vgrid.begin(), vgrid.end());
  vgrid.erase(std::unique(vgrid.begin(), vgrid.end()), vgrid.end());
  const Policy pol = solve(fund, vgrid);

  std::function<double(double)> phi_closed, IF_closed;
  if (variant == "affine" || variant == "linear") {
    phi_closed = [&](double x) { return phi_affine(cfg.params, K, R, x); };
    IF_closed = [&](double x) { return I_affine_closed(cfg.params, K, R, x); };
  } else if (variant == "capped_linear") {
    auto cc = std::make_shared<CappedClosedForm>(cfg.params, K, R);
    phi_closed = [cc](double x) { return cc->phi(x); };
    IF_closed = [cc](double x) { return cc->IF(x); };
  } else {
    err << "notice: bound variant " << variant << " has no closed form; phi_closed and IF_closed are left empty\n";
  }

  double max_phi = 0.0, max_IF = 0.0, max_z = 0.0;
  csv << "x,phi_ode,phi_closed,IF_ode,IF_closed,V,V_mc,V_mc_stderr\n";
  for (double x : xs) {
    const double ph = fund.phi(x).v, I = fund.IF(x).v, V = pol.evaluate(x).v;
    std::string pc, ic, vm, vs;
    if (phi_closed) {
      const double a = phi_closed(x), b = IF_closed(x);
      max_phi = std::max(max_phi, std::abs(ph - a));
      max_IF = std::max(max_IF, std::abs(I - b));
      pc = cell(a);
      ic = cell(b);
    }
    if (mc) {
      const auto e = estimate_value(cfg.params, f, pol.b_star, x, cfg.sim);
      vm = cell(e.mean);
      vs = cell(e.std_error);
      if (e.std_error > 0.0) max_z = std::max(max_z, std::abs(V - e.mean) / e.std_error);
    }
    csv << fmt::format("{},{},{},{},{},{},{},{}\n", cell(x), cell(ph), pc, cell(I), ic, cell(V), vm, vs);
  }
  if (phi_closed) {
    summary << fmt::format("max |phi_ode - phi_closed| = {:.3e}\n", max_phi);
    summary << fmt::format("max |IF_ode - IF_closed| = {:.3e}\n", max_IF);
  }
  if (mc) summary << fmt::format("max |V - V_mc| / stderr = {:.2f}\n", max_z);
  return kOk;
}

}  // namespace definetti::cli
