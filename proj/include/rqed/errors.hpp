#pragma once

#include <stdexcept>
#include <string>

namespace rqed {

// Input outside the mathematical domain of a formula (non-positive gap,
// rho <= rho_c for T_c, orthogonal dipole and polarization, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent input: bad config keys, unnormalized amplitudes,
// precondition violations of the pipeline steps.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation produced a non-finite or internally inconsistent result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rqed
