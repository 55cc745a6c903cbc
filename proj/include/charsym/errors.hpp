#pragma once

#include <stdexcept>
#include <string>

namespace charsym {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a model or metric (e.g. fractional power of
/// a non-positive invariant, non-Lorentzian base metric).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// First derivative of the Lagrangian vanishes, so xi is undefined.
class DegenerateModel : public Error {
 public:
  using Error::Error;
};

class MissingHessian : public Error {
 public:
  using Error::Error;
};

/// Map value left the coordinate domain of the target chart.
class ChartDomainError : public Error {
 public:
  using Error::Error;
};

/// Null projection: the requested spatial direction is not characteristic.
class NoRealRoot : public Error {
 public:
  using Error::Error;
};

/// Null projection: every coefficient of the reduced quadratic vanishes.
class FullyDegenerate : public Error {
 public:
  using Error::Error;
};

class StepUnderflow : public Error {
 public:
  using Error::Error;
};

/// Scenario file problem. `key` is the dotted path of the offending entry and
/// `line` its 1-based line number (0 when unknown).
class ConfigError : public Error {
 public:
  ConfigError(std::string key, int line, const std::string& what)
      : Error(format(key, line, what)), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& key, int line,
                            const std::string& what) {
    std::string msg = "config error";
    if (line > 0) msg += " at line " + std::to_string(line);
    if (!key.empty()) msg += " (key '" + key + "')";
    return msg + ": " + what;
  }

  std::string key_;
  int line_;
};

}  // namespace charsym
