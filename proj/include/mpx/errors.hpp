#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mpx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are not conformal for the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be nonsingular has a pivot below the singularity cutoff.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization met a nonpositive diagonal entry.
class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

/// The Jacobi SVD exhausted its sweep budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A structural hypothesis of a closed-form formula does not hold.
class HypothesisError : public Error {
 public:
  HypothesisError(std::string check, double residual, const std::string& what)
      : Error(what), check_(std::move(check)), residual_(residual) {}

  const std::string& check() const noexcept { return check_; }
  double residual() const noexcept { return residual_; }

 private:
  std::string check_;
  double residual_;
};

/// Arguments that are invalid regardless of numerical values.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace mpx
