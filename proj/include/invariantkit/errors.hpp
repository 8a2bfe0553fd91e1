#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace invkit {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Expression text could not be parsed.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("syntax error at position " + std::to_string(position) + ": " + message),
        position(position),
        message(message) {}
  std::size_t position;
  std::string message;
};

/// Identifier not present in the declared variable list.
class UnknownVariableError : public Error {
 public:
  explicit UnknownVariableError(const std::string& name)
      : Error("unknown variable '" + name + "'"), name(name) {}
  std::string name;
};

/// Evaluation left the real domain (ln of non-positive, 0^negative, division
/// by zero). Carries the offending subexpression.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, const std::string& subexpression)
      : Error(what + " in '" + subexpression + "'"), subexpression(subexpression) {}
  std::string subexpression;
};

/// The epsilon-indexed trajectory family lost its ordering beyond tolerance;
/// the integrator step is too coarse.
class NonMonotoneFamilyError : public Error {
 public:
  using Error::Error;
};

/// Sampled function grids do not line up.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// The divergence-test integrand left the positive-sign regime.
class SignViolationError : public Error {
 public:
  SignViolationError(double w, double value)
      : Error("mu(" + std::to_string(w) + ") = " + std::to_string(value) +
              " <= 0 inside the integration range"),
        w(w),
        value(value) {}
  double w;
  double value;
};

/// No grid point fell inside the boundary band, even after widening.
class EmptyBoundaryError : public Error {
 public:
  using Error::Error;
};

/// Problem configuration is malformed.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& field, const std::string& message)
      : Error("config '" + path + "', field '" + field + "': " + message),
        path(path),
        field(field) {}
  std::string path;
  std::string field;
};

}  // namespace invkit
