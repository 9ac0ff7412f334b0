#pragma once

#include <stdexcept>
#include <string>

namespace ptrm {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition. Nothing was computed.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The field is not decayed at the grid boundary, so periodic spectral
/// differentiation of it is not meaningful.
class DecayError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A nonnegative integer n < a sits on the pole a - n = 0 of the linear levels.
class PoleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A numerical procedure ran but could not deliver a result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Not enough recorded data for a trajectory analysis (too few snapshots,
/// empty fitting window).
class InsufficientDataError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ptrm
