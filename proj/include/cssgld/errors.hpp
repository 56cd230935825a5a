#pragma once

#include <stdexcept>
#include <string>

namespace cssgld {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not chain.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a scalar argument or configuration field failed.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf produced, iteration cap hit, or a sampler could not make progress.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Power iteration ran out of iterations; carries the last singular value estimate.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double last_estimate)
      : NumericError(what), last_estimate_(last_estimate) {}
  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

/// Malformed weight file or config document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Operation requested for a latent dimension it does not support.
class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

}  // namespace cssgld
