#pragma once

#include <stdexcept>
#include <string>

namespace ideg {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (e.g. x outside [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested at the degeneracy point where the quantity is singular.
class SingularPointError : public Error {
 public:
  using Error::Error;
};

/// Coefficient or weight data violating a construction invariant.
class InvalidModelError : public Error {
 public:
  using Error::Error;
};

/// Operation precondition violated by the caller's data.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Control / observation set geometry violated (e.g. x0 in the closure of omega').
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Time step too large for the tridiagonal system to stay diagonally dominant.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// Configuration error. Always names the offending dotted key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// I/O failure while reading tables or writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ideg
