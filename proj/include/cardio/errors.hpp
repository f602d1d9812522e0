#pragma once

#include <stdexcept>
#include <string>

namespace cardio {

// Bad input: malformed files, out-of-range values, invalid options.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation could not be completed (e.g. a covariance lost definiteness).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cardio
