#pragma once

#include <stdexcept>
#include <string>

namespace qla {

/// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or local coordinate outside the set an operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value, gradient or Hessian returned by a field.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class OptimizerError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class LinearAlgebraError : public Error {
 public:
  using Error::Error;
};

/// Config parse/validation failure. `key` and `line` locate the offending entry
/// (line is 1-based, 0 when unknown).
class ConfigError : public Error {
 public:
  ConfigError(std::string key, int line, const std::string& what)
      : Error(line > 0 ? "config key '" + key + "' (line " + std::to_string(line) + "): " + what
                       : "config key '" + key + "': " + what),
        key_(std::move(key)),
        line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace qla
