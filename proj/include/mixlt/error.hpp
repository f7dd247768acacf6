#pragma once

#include <stdexcept>
#include <string>

namespace mixlt {

// Base of every error raised by the library. The CLI maps the two
// families below onto distinct exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad input: malformed descriptors, missing companions, invalid
// intervals, mismatched point types. Exit code 2.
class ConfigError : public Error {
  public:
    using Error::Error;
};

class DomainError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class TypeError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class InvalidIntervalError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class DegenerateEventError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class SchemeError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class UnsupportedSystemError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

// Numerical trouble discovered while running. Exit code 3.
class NumericalError : public Error {
  public:
    using Error::Error;
};

class RangeError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class OverflowError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

// Rauzy-Veech induction hit a (measure-zero) tie or a degenerate run.
class NonGenericError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

}  // namespace mixlt
