#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "definetti/mc_sim.hpp"
#include "definetti/model.hpp"
#include "definetti/ode_engine.hpp"

namespace definetti::cli {

using json = nlohmann::json;

/// Bound descriptor as written in a config file.
struct BoundSpec {
  std::string variant = "constant";
  double K = 0.0;
  double R = 0.0;
  double eps = 0.0;
  std::vector<double> xs, fs;

  BoundFn build() const;
  json to_json() const;
  bool has_closed_form() const { return variant == "affine" || variant == "linear" || variant == "capped_linear"; }
};

/// Uniform output grid "from:to:points"; to = 0 means max(x_query, 4 b_hat).
struct GridSpec {
  double from = 0.0;
  double to = 0.0;
  int points = 401;
};

struct ProblemConfig {
  ModelParams params{1.0, 1.0, 1.0};
  BoundSpec bound;
  SolveConfig solve;
  SimConfig sim;
  std::optional<GridSpec> grid;
  std::string out_dir = ".";
  /// "b_star", "b_hat" or a number.
  std::string simulate_barrier = "b_star";
  std::vector<double> simulate_x0 = {0.0};
  bool verify_dominance = true;
};

/// Parses and validates a JSON config; throws ConfigError naming the line (for
/// syntax errors) or the dotted field path (for schema errors).
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::string& path);

GridSpec parse_grid(const std::string& spec);
/// Value grid for a solve: the grid spec if present (with 0 prepended when it
/// starts later), else the default grid.
std::vector<double> resolve_grid(const ProblemConfig& cfg, const std::optional<GridSpec>& grid);

}  // namespace definetti::cli
