#pragma once

#include <stdexcept>
#include <string>

namespace pmaflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Newton iteration failed to reduce the residual.
class NewtonDiverged : public Error {
 public:
  using Error::Error;
};

/// The eigenvalue floor of I + H could not be kept (usually dt too large).
class AdmissibilityLost : public Error {
 public:
  using Error::Error;
};

/// A point left the cone on which a Hessian symbol is defined.
class ConeViolation : public Error {
 public:
  using Error::Error;
};

/// A differential inequality required by a checker does not hold.
class HypothesisViolated : public Error {
 public:
  using Error::Error;
};

/// Soft precondition failure: the computation is well defined but the
/// caller violated a standing assumption of the estimate it feeds.
class SoftPreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmaflow
