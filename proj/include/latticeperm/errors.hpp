#pragma once

#include <stdexcept>
#include <string>

namespace latticeperm {

// Bad argument: out-of-range coordinate, shape mismatch, state outside the
// required region, and the like.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The requested computation does not fit the exact-enumeration or
// closed-form budgets (state space too large, counter overflow).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative numerical routine failed to converge; the message carries
// the last iterates so the caller can judge how close it got.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace latticeperm
