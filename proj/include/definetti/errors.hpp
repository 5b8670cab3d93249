#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace definetti {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration or construction parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to meet its accuracy contract. Carries the
/// history of the monitored quantity (residuals, error estimates, ...).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::vector<double> history = {})
      : std::runtime_error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// A computed object violates a property it must have by theory (monotonicity,
/// bracket signs, positive Wronskian, ...). Usually means upstream accuracy loss.
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace definetti
