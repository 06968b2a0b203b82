#pragma once

#include <stdexcept>
#include <string>

namespace nrm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A result that is not representable as a finite double.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Enumeration or table request above a hard size cap.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

/// The family does not support the requested operation (e.g. no T sampler).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed user configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical procedure failed to reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double value, double error_estimate)
      : NumericalError(what + " (value=" + std::to_string(value) +
                       ", error estimate=" + std::to_string(error_estimate) + ")"),
        value_(value),
        error_estimate_(error_estimate) {}

  double value() const noexcept { return value_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double value_;
  double error_estimate_;
};

}  // namespace nrm
