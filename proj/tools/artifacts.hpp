#pragma once

#include <string>

#include "config.hpp"
#include "definetti/optimizer.hpp"
#include "definetti/verifier.hpp"

namespace definetti::cli {

inline constexpr int kPolicyFormatVersion = 1;

/// Every field of the Policy except the value profile, which goes to the CSV.
json policy_to_json(const Policy& policy, const BoundSpec& bound, const std::string& value_csv);

/// "x,V,V1,V2" rows with 17 significant digits.
std::string value_csv(const FnProfile& value);
FnProfile parse_value_csv(const std::string& text, const std::string& source);

/// Writes policy.json and value.csv into `dir` (created if needed).
void write_policy(const Policy& policy, const BoundSpec& bound, const std::string& dir);

/// Rebuilds a Policy from policy.json and the value CSV it names (resolved
/// relative to the JSON file). Model parameters and the bound come from the
/// config, so a mismatched config shows up in the verifier.
Policy read_policy(const std::string& policy_json_path, const ProblemConfig& cfg);

json report_to_json(const VerificationReport& rep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace definetti::cli
