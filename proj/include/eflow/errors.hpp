#pragma once

#include <stdexcept>
#include <string>

namespace eflow {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

// A polyline edge has (numerically) zero length.
class ImmersionError : public Error {
  public:
    using Error::Error;
};

class PreconditionError : public Error {
  public:
    using Error::Error;
};

class DivergenceError : public Error {
  public:
    using Error::Error;
};

class ShootingFailure : public Error {
  public:
    using Error::Error;
};

class EnumerationIncomplete : public Error {
  public:
    using Error::Error;
};

class OptimizationFailure : public Error {
  public:
    using Error::Error;
};

class LengthDegeneracy : public Error {
  public:
    using Error::Error;
};

class StepFailure : public Error {
  public:
    using Error::Error;
};

class DegeneracyError : public Error {
  public:
    using Error::Error;
};

class PreparationFailure : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace eflow
