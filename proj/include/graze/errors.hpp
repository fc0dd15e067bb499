#pragma once

#include <stdexcept>
#include <string>

namespace graze {

/// Root of all library errors. Grazing, escape and miss conditions are
/// reported as values; only contract violations throw.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or state that is geometrically impossible (e.g. inside a disk).
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Two scatterers with touching or overlapping closures.
class OverlapError : public Error {
 public:
  using Error::Error;
};

/// Jacobian requested at (or too near) a tangential collision.
class GrazingError : public Error {
 public:
  using Error::Error;
};

/// Index or argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The orbit is parabolic to working precision (D vanishes).
class DegenerateOrbitError : public Error {
 public:
  using Error::Error;
};

/// Hypotheses of the grazing perturbation result are not satisfied.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A continuation trace that does not certify a grazing orbit.
class InvalidTraceError : public Error {
 public:
  using Error::Error;
};

/// Malformed scene or orbit file.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : Error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace graze
