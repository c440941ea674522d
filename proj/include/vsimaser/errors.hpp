#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vsimaser {

// Bad inputs: out-of-domain parameters, malformed files, unknown keys.
// The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation could not produce a result for otherwise valid inputs.
// The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoResonanceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateFitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_parameters, int iterations)
      : NumericalError(what), last_parameters_(std::move(last_parameters)), iterations_(iterations) {}

  const std::vector<double>& last_parameters() const noexcept { return last_parameters_; }
  int iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> last_parameters_;
  int iterations_;
};

// Pump rate does not exceed the relaxation rate, so the threshold is undefined.
class NoInversionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotFoundError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace vsimaser
