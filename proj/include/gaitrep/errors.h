#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaitrep {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-readable tag used by the command-line front end.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view kind() const noexcept = 0;
};

#define GAITREP_DEFINE_ERROR(Name, Base)                              \
  class Name : public Base {                                          \
   public:                                                            \
    using Base::Base;                                                 \
    std::string_view kind() const noexcept override { return #Name; } \
  }

/// Bad user input: parameters, profiles, bounds, horizons.
class ValidationError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "ValidationError"; }
};
GAITREP_DEFINE_ERROR(ParseError, ValidationError);
GAITREP_DEFINE_ERROR(TooFewSamples, ValidationError);
GAITREP_DEFINE_ERROR(DomainMismatch, ValidationError);
GAITREP_DEFINE_ERROR(OutOfDomain, ValidationError);

/// Numerical trouble in the solver or the simulation.
class NumericalError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "NumericalError"; }
};
GAITREP_DEFINE_ERROR(NotStabilizable, NumericalError);
GAITREP_DEFINE_ERROR(NumericalFailure, NumericalError);
GAITREP_DEFINE_ERROR(SimulationDiverged, NumericalError);

GAITREP_DEFINE_ERROR(InfeasibleBounds, Error);

#undef GAITREP_DEFINE_ERROR

}  // namespace gaitrep
