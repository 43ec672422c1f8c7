#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

// Raised when inputs violate a documented precondition (bad sizes, sets,
// grids, configuration values).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a computation produces a non-finite value or an iterative
// procedure cannot produce an unambiguous answer.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mfg
