#pragma once

#include <stdexcept>
#include <string>

namespace decoyqkd {

/// Malformed or out-of-range input (bad probabilities, negative rates,
/// unparsable records).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A mathematical precondition of a bound does not hold for otherwise valid
/// input, e.g. the ratio ordering on the photon-number coefficients.
class PreconditionViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace decoyqkd
