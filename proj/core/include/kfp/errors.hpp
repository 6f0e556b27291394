#pragma once
#include <stdexcept>
#include <string>

namespace kfp {

// Input outside the supported domain (pole hit, parameter out of range, ...).
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Bad user-supplied configuration (CLI / JSON config level).
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Requested accuracy could not be reached; carries the best estimate so a
// caller may decide to keep going anyway.
struct AccuracyError : std::runtime_error {
  double best_estimate;
  double err_estimate;
  AccuracyError(const std::string& what, double best, double err)
      : std::runtime_error(what), best_estimate(best), err_estimate(err) {}
};

// Iteration / quadrature failed to converge.
struct ConvergenceError : std::runtime_error {
  double best_estimate;
  explicit ConvergenceError(const std::string& what, double best = 0.0)
      : std::runtime_error(what), best_estimate(best) {}
};

}  // namespace kfp
