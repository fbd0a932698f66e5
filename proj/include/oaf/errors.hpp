#pragma once

#include <stdexcept>
#include <string>

namespace oaf {

// Invalid user-facing input: bad dimensions, malformed files, infeasible
// configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver ran out of its iteration budget. Carries the last
// residual so callers can report how far off the iterate still was.
// The CLI maps this to exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace oaf
