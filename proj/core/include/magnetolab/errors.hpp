#pragma once

#include <stdexcept>
#include <string>

namespace magnetolab {

// Every failure raised by the library derives from Error. The command-line
// front end maps the families below onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed parameters, inconsistent systems, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A point left the coordinate domain of a chart (e.g. y <= 0 on the half-plane).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown: step size collapse, non-finite state, failed Newton.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Speed zero, where the unit-circle geometry is undefined.
class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// The transverse frame lost rank along an orbit.
class FrameError : public NumericalError {
 public:
  FrameError(const std::string& what, double t) : NumericalError(what), time(t) {}
  double time;
};

// Endpoint of a symplectic path has eigenvalue one (trace within tolerance of 2).
class DegeneracyError : public NumericalError {
 public:
  DegeneracyError(const std::string& what, double tr) : NumericalError(what), trace(tr) {}
  double trace;
};

// Requested an exact-form computation for a field with nonzero total flux.
class NotExactError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace magnetolab
