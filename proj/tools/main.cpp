#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "definetti/errors.hpp"

using namespace definetti::cli;

namespace {

int with_output(const std::string& path, const std::function<int(std::ostream&)>& fn) {
  if (path.empty() || path == "-") return fn(std::cout);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw definetti::ConfigError("cannot write " + path);
  return fn(file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal dividends under a concave rate bound: solve, verify, simulate, compare"};
  app.require_subcommand(1);

  std::string config_path, out, grid, policy_path, barrier = "", rule, seed_text;
  int workers = -1;
  bool no_dominance = false, no_mc = false;
  std::vector<double> x0s;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "problem config (JSON)")->required();
    sub->add_option("--seed", seed_text, "override sim.seed");
    sub->add_option("--workers", workers, "override sim.workers");
  };

  auto* solve = app.add_subcommand("solve", "solve the control problem and write policy.json and value.csv");
  add_common(solve);
  solve->add_option("--out", out, "output directory (default: output.dir from the config)");
  solve->add_option("--grid", grid, "value grid a:b:n");

  auto* verify = app.add_subcommand("verify", "verify solve artifacts against a config");
  add_common(verify);
  verify->add_option("--policy", policy_path, "policy.json written by solve")->required();
  verify->add_option("--out", out, "write the report as JSON");
  verify->add_flag("--no-dominance", no_dominance, "skip the Monte Carlo dominance suite");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo value of a barrier or rule");
  add_common(simulate);
  simulate->add_option("--barrier", barrier, "b_star, b_hat or a number (default: simulate.barrier)");
  simulate->add_option("--rule", rule, "proportional:c");
  simulate->add_option("--x0", x0s, "starting points (default: simulate.x0)")->delimiter(',');
  simulate->add_option("--out", out, "CSV output (default: stdout)");

  auto* compare = app.add_subcommand("compare", "closed form vs ODE vs Monte Carlo table");
  add_common(compare);
  compare->add_option("--grid", grid, "grid a:b:n (default 0:8:17)");
  compare->add_option("--out", out, "CSV output (default: stdout)");
  compare->add_flag("--no-mc", no_mc, "leave the Monte Carlo columns empty");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kConfigError;
  }

  return guarded(
      [&]() -> int {
        ProblemConfig cfg = load_config(config_path);
        if (!seed_text.empty()) {
          std::size_t used = 0;
          unsigned long long s = 0;
          try {
            s = std::stoull(seed_text, &used);
          } catch (const std::exception&) {
            used = 0;
          }
          if (used != seed_text.size() || seed_text[0] == '-')
            throw definetti::ConfigError("--seed: expected a non-negative integer");
          cfg.sim.seed = s;
        }
        if (workers >= 0) cfg.sim.workers = workers;
        std::optional<GridSpec> gs = cfg.grid;
        if (!grid.empty()) gs = parse_grid(grid);

        if (solve->parsed())
          return cmd_solve(cfg, gs, out.empty() ? cfg.out_dir : out, std::cout, std::cerr);
        if (verify->parsed())
          return cmd_verify(cfg, policy_path, cfg.verify_dominance && !no_dominance, out, std::cout, std::cerr);
        if (simulate->parsed()) {
          SimulateRequest req{barrier.empty() ? cfg.simulate_barrier : barrier, rule,
                              x0s.empty() ? cfg.simulate_x0 : x0s};
          return with_output(out, [&](std::ostream& os) { return cmd_simulate(cfg, req, os, std::cerr); });
        }
        return with_output(out, [&](std::ostream& os) {
          return cmd_compare(cfg, gs, !no_mc, os, out.empty() ? std::cerr : std::cout, std::cerr);
        });
      },
      std::cerr);
}
