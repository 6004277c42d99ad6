#pragma once

#include <stdexcept>
#include <string>

namespace iarma {

/// Bad arguments or parameters outside their admissible range.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failures of the numerics themselves: non-finite likelihoods, optimizer
/// breakdown, a c_n recursion that collapses below its floor.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data that carries no information for the model (e.g. a constant series).
class DegenerateDataError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iarma
