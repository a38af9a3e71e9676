#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace partcolor {

// Bad inputs: dimension mismatches, out-of-range parameters, precondition failures.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed text input; carries the 1-based line number of the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// An iterative method did not reach its tolerance within the iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

// A collaborator returned something that breaks its contract (infeasible oracle output etc).
class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid solver configuration (for example a smoothing parameter that underflows).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A randomized phase failed after exhausting its retry budget.
class PhaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace partcolor
