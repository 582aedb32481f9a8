#pragma once

#include <stdexcept>
#include <string>

namespace entlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates an operation's precondition (singular matrix,
/// non-PSD covariance, dimension mismatch, out-of-range epsilon, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// The operation is well defined but not implemented for this input, e.g.
/// Monte Carlo volume of a high-dimensional polytope.
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// No interior point could be found for a polytope.
class InfeasibleBody : public Error {
 public:
  using Error::Error;
};

/// Sampler and density disagree (a draw landed where the density is zero).
class InternalInconsistency : public Error {
 public:
  using Error::Error;
};

/// An estimator could not produce a finite value with the given budget.
class EstimationFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace entlab
