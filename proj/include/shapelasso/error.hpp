#pragma once

#include <stdexcept>
#include <string>

namespace shapelasso {

/// Raised when caller-supplied data or parameters violate a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a QP backend cannot produce a usable solution.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shapelasso
