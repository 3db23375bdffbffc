#pragma once

#include <stdexcept>
#include <string>

namespace riskshare {

/// Malformed input: bad probabilities, mismatched spaces, bad parameters.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical precondition does not hold (singular covariance, constant
/// endowment where a non-constant one is required, zero price, ...).
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SingularCovarianceError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

}  // namespace riskshare
