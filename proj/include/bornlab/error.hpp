#pragma once

#include <stdexcept>
#include <string>

namespace bornlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied input violates an operation's precondition
/// (shape mismatch, out-of-range parameter, invalid configuration).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical guard tripped at run time: a result would be meaningless
/// (packet wraps the box, equal-modulus precondition fails, non-finite value).
class NumericalGuardError : public Error {
 public:
  using Error::Error;
};

/// The explicit time stepper was asked to run above its stability bound.
class StabilityGuardError : public PreconditionError {
 public:
  StabilityGuardError(const std::string& what, double suggested_dt)
      : PreconditionError(what), suggested_dt_(suggested_dt) {}
  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  double suggested_dt_;
};

}  // namespace bornlab
