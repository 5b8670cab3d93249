#include "artifacts.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "definetti/errors.hpp"

namespace definetti::cli {

namespace fs = std::filesystem;

namespace {

double field(const json& j, const std::string& key, const std::string& source) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(fmt::format("{}: field {} missing or not a number", source, key));
  return j.at(key).get<double>();
}

double parse_double(const std::string& cell, const std::string& where) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ConfigError(fmt::format("{}: cannot parse \"{}\" as a number", where, cell));
  return v;
}

}  // namespace

json policy_to_json(const Policy& policy, const BoundSpec& bound, const std::string& value_csv) {
  const auto& d = policy.diagnostics;
  json diag{{"regime_statistic", d.regime_statistic},
            {"root_residual", d.root_residual},
            {"b_hat", d.b_hat},
            {"d1_jump", d.d1_jump},
            {"d2_jump", d.d2_jump},
            {"phi_residual", d.phi_residual},
            {"IF_residual", d.IF_residual},
            {"phi_mesh_h", d.phi_mesh_h},
            {"IF_mesh_h", d.IF_mesh_h},
            {"truncation_L", d.truncation_L},
            {"kinked_bound", d.kinked_bound}};
  return json{{"format", "definetti-policy"},
              {"version", kPolicyFormatVersion},
              {"regime", to_string(policy.regime)},
              {"b_star", policy.b_star},
              {"C1", policy.C1},
              {"C2", policy.C2},
              {"borderline", d.borderline},
              {"sign_changes", d.sign_changes},
              {"params", {{"mu", policy.params.mu()}, {"sigma", policy.params.sigma()}, {"q", policy.params.q()}}},
              {"bound", bound.to_json()},
              {"value_csv", value_csv},
              {"diagnostics", diag}};
}

std::string value_csv(const FnProfile& value) {
  std::string s = "x,V,V1,V2\n";
  for (std::size_t i = 0; i < value.size(); ++i)
    s += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", value.nodes()[i], value.values()[i], value.d1()[i],
                     value.d2()[i]);
  return s;
}

FnProfile parse_value_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "x,V,V1,V2")
    throw ConfigError(fmt::format("{}: expected header x,V,V1,V2", source));
  std::vector<double> x, v, d1, d2;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    const std::string where = fmt::format("{}:{}", source, lineno);
    if (cells.size() != 4) throw ConfigError(fmt::format("{}: expected 4 columns", where));
    x.push_back(parse_double(cells[0], where));
    v.push_back(parse_double(cells[1], where));
    d1.push_back(parse_double(cells[2], where));
    d2.push_back(parse_double(cells[3], where));
  }
  try {
    return FnProfile(std::move(x), std::move(v), std::move(d1), std::move(d2));
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("{}: {}", source, e.what()));
  }
}

void write_policy(const Policy& policy, const BoundSpec& bound, const std::string& dir) {
  fs::create_directories(dir);
  write_file((fs::path(dir) / "value.csv").string(), value_csv(policy.value));
  write_file((fs::path(dir) / "policy.json").string(), policy_to_json(policy, bound, "value.csv").dump(2) + "\n");
}

Policy read_policy(const std::string& policy_json_path, const ProblemConfig& cfg) {
  json j;
  try {
    j = json::parse(read_file(policy_json_path));
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: not valid JSON: {}", policy_json_path, e.what()));
  }
  const std::string& src = policy_json_path;
  if (!j.is_object() || j.value("format", "") != "definetti-policy")
    throw ConfigError(fmt::format("{}: not a policy report", src));
  if (j.value("version", 0) != kPolicyFormatVersion)
    throw ConfigError(fmt::format("{}: unsupported version", src));

  Policy pol;
  const std::string regime = j.value("regime", "");
  if (regime == "ZeroBarrier") pol.regime = Regime::ZeroBarrier;
  else if (regime == "PositiveBarrier") pol.regime = Regime::PositiveBarrier;
  else throw ConfigError(fmt::format("{}: unknown regime \"{}\"", src, regime));
  pol.b_star = field(j, "b_star", src);
  pol.C1 = field(j, "C1", src);
  pol.C2 = field(j, "C2", src);
  pol.params = cfg.params;
  pol.bound = cfg.bound.build();

  auto& d = pol.diagnostics;
  d.borderline = j.value("borderline", false);
  d.sign_changes = j.value("sign_changes", 0);
  if (!j.contains("diagnostics") || !j.at("diagnostics").is_object())
    throw ConfigError(fmt::format("{}: missing diagnostics", src));
  const json& dj = j.at("diagnostics");
  d.regime_statistic = field(dj, "regime_statistic", src);
  d.root_residual = field(dj, "root_residual", src);
  d.b_hat = field(dj, "b_hat", src);
  d.d1_jump = field(dj, "d1_jump", src);
  d.d2_jump = field(dj, "d2_jump", src);
  d.phi_residual = field(dj, "phi_residual", src);
  d.IF_residual = field(dj, "IF_residual", src);
  d.phi_mesh_h = field(dj, "phi_mesh_h", src);
  d.IF_mesh_h = field(dj, "IF_mesh_h", src);
  d.truncation_L = field(dj, "truncation_L", src);
  d.kinked_bound = dj.value("kinked_bound", false);

  const std::string csv_name = j.value("value_csv", "value.csv");
  const fs::path csv_path = fs::path(policy_json_path).parent_path() / csv_name;
  pol.value = parse_value_csv(read_file(csv_path.string()), csv_path.string());
  return pol;
}

json report_to_json(const VerificationReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass},
                      {"detail", c.detail}});
  json dom = json::array();
  for (const auto& d : rep.dominance)
    dom.push_back({{"strategy", d.strategy},
                   {"x0", d.x0},
                   {"analytic", d.analytic},
                   {"mc", d.mc},
                   {"stderr", d.std_error},
                   {"allowance", d.allowance},
                   {"z", d.z},
                   {"pass", d.pass}});
  return json{{"hjb_sup_residual", rep.hjb_sup_residual},
              {"hjb_tolerance", rep.hjb_tolerance},
              {"selector_consistency", rep.selector_consistency},
              {"smooth_fit",
               {{"V0", rep.smooth_fit.V0},
                {"slope_gap", rep.smooth_fit.slope_gap},
                {"d1_jump", rep.smooth_fit.d1_jump},
                {"d2_jump", rep.smooth_fit.d2_jump}}},
              {"concavity_violations", rep.concavity_violations},
              {"checks", checks},
              {"dominance", dom},
              {"dominance_meaning", "consistent with optimality (statistical), not a proof"},
              {"overall", rep.overall() ? "pass" : "fail"}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path));
  out << text;
  if (!out) throw ConfigError(fmt::format("write to {} failed", path));
}

}  // namespace definetti::cli
