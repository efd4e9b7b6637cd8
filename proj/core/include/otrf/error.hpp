#pragma once

#include <stdexcept>
#include <string>

namespace otrf {

// Caller asked for something the contract does not allow (shape mismatch,
// incompatible ensemble size, odd walker count for a paired coupling...).
class InvalidRequest : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical breakdown: non-convergence, non-finite values, loss of
// positive definiteness after jitter escalation, overflow.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace otrf
