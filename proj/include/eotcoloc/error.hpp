#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eotcoloc {

/// Invalid input: violated precondition or malformed data. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be read or written. Maps to CLI exit code 1.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Floating-point breakdown, e.g. kernel underflow in scaling mode. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solve exhausted its iteration budget. Carries the residual and, inside a
/// bootstrap run, the replicate that failed (-1 for the center problem).
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double marginal_error, long replicate = -1)
      : NumericalError(what), marginal_error_(marginal_error), replicate_(replicate) {}

  double marginal_error() const noexcept { return marginal_error_; }
  long replicate() const noexcept { return replicate_; }

 private:
  double marginal_error_;
  long replicate_;
};

}  // namespace eotcoloc
