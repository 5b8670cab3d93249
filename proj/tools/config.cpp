#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "definetti/closed_forms.hpp"
#include "definetti/errors.hpp"
#include "definetti/numerics.hpp"
#include "definetti/optimizer.hpp"

namespace definetti::cli {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> allowed) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(fmt::format("{}: unknown field", join(path, key)));
}

const json& object_at(const json& parent, const std::string& path, const std::string& key) {
  const std::string full = join(path, key);
  if (!parent.contains(key)) throw ConfigError(fmt::format("{}: missing required field", full));
  const json& v = parent.at(key);
  if (!v.is_object()) throw ConfigError(fmt::format("{}: expected an object", full));
  return v;
}

double number(const json& v, const std::string& full) {
  if (!v.is_number()) throw ConfigError(fmt::format("{}: expected a number", full));
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(fmt::format("{}: must be finite", full));
  return d;
}

double required(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(fmt::format("{}: missing required field", join(path, key)));
  return number(obj.at(key), join(path, key));
}

double optional(const json& obj, const std::string& path, const std::string& key, double fallback) {
  return obj.contains(key) ? number(obj.at(key), join(path, key)) : fallback;
}

long integer(const json& obj, const std::string& path, const std::string& key, long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(fmt::format("{}: expected an integer", join(path, key)));
  return v.get<long>();
}

bool boolean(const json& obj, const std::string& path, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(fmt::format("{}: expected true or false", join(path, key)));
  return v.get<bool>();
}

std::vector<double> numbers(const json& obj, const std::string& path, const std::string& key) {
  const std::string full = join(path, key);
  if (!obj.contains(key)) throw ConfigError(fmt::format("{}: missing required field", full));
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(fmt::format("{}: expected an array of numbers", full));
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], fmt::format("{}[{}]", full, i)));
  return out;
}

// Wraps exceptions from model constructors with the field path that fed them.
template <class Fn>
auto at_path(const std::string& path, Fn fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

BoundSpec parse_bound(const json& b) {
  const std::string path = "bound";
  if (!b.contains("variant")) throw ConfigError("bound.variant: missing required field");
  if (!b.at("variant").is_string()) throw ConfigError("bound.variant: expected a string");
  BoundSpec s;
  s.variant = b.at("variant").get<std::string>();
  if (s.variant == "constant") {
    reject_unknown(b, path, {"variant", "R"});
    s.R = required(b, path, "R");
  } else if (s.variant == "linear") {
    reject_unknown(b, path, {"variant", "K"});
    s.K = required(b, path, "K");
  } else if (s.variant == "affine" || s.variant == "capped_linear") {
    reject_unknown(b, path, {"variant", "K", "R"});
    s.K = required(b, path, "K");
    s.R = required(b, path, "R");
  } else if (s.variant == "smoothed_capped_linear") {
    reject_unknown(b, path, {"variant", "K", "R", "eps"});
    s.K = required(b, path, "K");
    s.R = required(b, path, "R");
    s.eps = required(b, path, "eps");
  } else if (s.variant == "custom") {
    reject_unknown(b, path, {"variant", "x", "F"});
    s.xs = numbers(b, path, "x");
    s.fs = numbers(b, path, "F");
  } else {
    throw ConfigError(fmt::format(
        "bound.variant: unknown variant \"{}\" (expected constant, linear, affine, capped_linear, "
        "smoothed_capped_linear or custom)",
        s.variant));
  }
  at_path("bound", [&] { return s.build(); });
  return s;
}

}  // namespace

BoundFn BoundSpec::build() const {
  if (variant == "constant") return BoundFn::constant(R);
  if (variant == "linear") return BoundFn::linear(K);
  if (variant == "affine") return BoundFn::affine(K, R);
  if (variant == "capped_linear") return BoundFn::capped_linear(K, R);
  if (variant == "smoothed_capped_linear") return BoundFn::smoothed_capped_linear(K, R, eps);
  if (variant == "custom") return BoundFn::tabulated(xs, fs);
  throw ConfigError(fmt::format("unknown bound variant \"{}\"", variant));
}

json BoundSpec::to_json() const {
  json j{{"variant", variant}};
  if (variant == "constant") j["R"] = R;
  if (variant == "linear") j["K"] = K;
  if (variant == "affine" || variant == "capped_linear") {
    j["K"] = K;
    j["R"] = R;
  }
  if (variant == "smoothed_capped_linear") {
    j["K"] = K;
    j["R"] = R;
    j["eps"] = eps;
  }
  if (variant == "custom") {
    j["x"] = xs;
    j["F"] = fs;
  }
  return j;
}

ProblemConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(root, "", {"params", "bound", "solve", "sim", "grid", "output", "simulate", "verify"});

  ProblemConfig cfg;
  const json& pj = object_at(root, "", "params");
  reject_unknown(pj, "params", {"mu", "sigma", "q"});
  const double mu = required(pj, "params", "mu");
  const double sigma = required(pj, "params", "sigma");
  const double q = required(pj, "params", "q");
  cfg.params = at_path("params", [&] { return ModelParams(mu, sigma, q); });

  cfg.bound = parse_bound(object_at(root, "", "bound"));

  if (root.contains("solve")) {
    const json& s = object_at(root, "", "solve");
    reject_unknown(s, "solve", {"tol", "truncation_L", "truncation_M", "mesh_n", "refine_max", "x_query"});
    cfg.solve.tol = optional(s, "solve", "tol", cfg.solve.tol);
    cfg.solve.truncation_L = optional(s, "solve", "truncation_L", cfg.solve.truncation_L);
    cfg.solve.truncation_M = optional(s, "solve", "truncation_M", cfg.solve.truncation_M);
    cfg.solve.mesh_n = static_cast<int>(integer(s, "solve", "mesh_n", cfg.solve.mesh_n));
    cfg.solve.refine_max = static_cast<int>(integer(s, "solve", "refine_max", cfg.solve.refine_max));
    cfg.solve.x_query = optional(s, "solve", "x_query", cfg.solve.x_query);
  }
  at_path("solve", [&] {
    cfg.solve.validate();
    return 0;
  });

  if (root.contains("sim")) {
    const json& s = object_at(root, "", "sim");
    reject_unknown(s, "sim", {"dt", "horizon", "n_paths", "seed", "antithetic", "workers", "allow_short_horizon"});
    cfg.sim.dt = optional(s, "sim", "dt", cfg.sim.dt);
    cfg.sim.horizon = optional(s, "sim", "horizon", cfg.sim.horizon);
    cfg.sim.n_paths = integer(s, "sim", "n_paths", cfg.sim.n_paths);
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) throw ConfigError("sim.seed: expected a non-negative integer");
      cfg.sim.seed = s.at("seed").get<std::uint64_t>();
    }
    cfg.sim.antithetic = boolean(s, "sim", "antithetic", cfg.sim.antithetic);
    cfg.sim.workers = static_cast<int>(integer(s, "sim", "workers", cfg.sim.workers));
    cfg.sim.allow_short_horizon = boolean(s, "sim", "allow_short_horizon", cfg.sim.allow_short_horizon);
  }
  cfg.sim.validate(cfg.params.q());

  if (root.contains("grid")) {
    const json& g = object_at(root, "", "grid");
    reject_unknown(g, "grid", {"from", "to", "points"});
    GridSpec gs;
    gs.from = optional(g, "grid", "from", gs.from);
    gs.to = optional(g, "grid", "to", gs.to);
    gs.points = static_cast<int>(integer(g, "grid", "points", gs.points));
    if (gs.from < 0.0) throw ConfigError("grid.from: must be >= 0");
    if (gs.to != 0.0 && !(gs.to > gs.from)) throw ConfigError("grid.to: must exceed grid.from");
    if (gs.points < 2) throw ConfigError("grid.points: must be >= 2");
    cfg.grid = gs;
  }

  if (root.contains("output")) {
    const json& o = object_at(root, "", "output");
    reject_unknown(o, "output", {"dir"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) throw ConfigError("output.dir: expected a string");
      cfg.out_dir = o.at("dir").get<std::string>();
    }
  }

  if (root.contains("simulate")) {
    const json& s = object_at(root, "", "simulate");
    reject_unknown(s, "simulate", {"barrier", "x0"});
    if (s.contains("barrier")) {
      const json& b = s.at("barrier");
      if (b.is_string()) {
        cfg.simulate_barrier = b.get<std::string>();
        if (cfg.simulate_barrier != "b_star" && cfg.simulate_barrier != "b_hat")
          throw ConfigError("simulate.barrier: expected \"b_star\", \"b_hat\" or a number");
      } else {
        const double v = number(b, "simulate.barrier");
        if (v < 0.0) throw ConfigError("simulate.barrier: must be >= 0");
        cfg.simulate_barrier = fmt::format("{:.17g}", v);
      }
    }
    if (s.contains("x0")) {
      cfg.simulate_x0 = numbers(s, "simulate", "x0");
      for (std::size_t i = 0; i < cfg.simulate_x0.size(); ++i)
        if (cfg.simulate_x0[i] < 0.0) throw ConfigError(fmt::format("simulate.x0[{}]: must be >= 0", i));
    }
  }

  if (root.contains("verify")) {
    const json& v = object_at(root, "", "verify");
    reject_unknown(v, "verify", {"dominance"});
    cfg.verify_dominance = boolean(v, "verify", "dominance", cfg.verify_dominance);
  }
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

GridSpec parse_grid(const std::string& spec) {
  GridSpec g;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> g.from >> c1 >> g.to >> c2 >> g.points) || c1 != ':' || c2 != ':' || !in.eof())
    throw ConfigError(fmt::format("--grid: expected a:b:n, got \"{}\"", spec));
  if (g.from < 0.0 || !(g.to > g.from) || g.points < 2)
    throw ConfigError("--grid: need 0 <= a < b and n >= 2");
  return g;
}

std::vector<double> resolve_grid(const ProblemConfig& cfg, const std::optional<GridSpec>& grid) {
  if (!grid) return default_value_grid(cfg.params);
  const double to = grid->to > 0.0 ? grid->to : std::max(cfg.solve.x_query, 4.0 * psi_inflection(cfg.params));
  if (!(to > grid->from)) throw ConfigError("grid: upper end must exceed the lower end");
  auto xs = numerics::linspace(grid->from, to, grid->points);
  if (xs.front() > 0.0) xs.insert(xs.begin(), 0.0);
  return xs;
}

}  // namespace definetti::cli
