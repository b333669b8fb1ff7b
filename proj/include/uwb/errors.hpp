#pragma once

#include <stdexcept>
#include <string>

namespace uwb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameter values or malformed configuration. CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Out-of-domain arguments (non-positive distance, TOA outside the record).
class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A fitting procedure could not produce a usable model. CLI exit code 3.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Missing, malformed or insufficient data. CLI exit code 4.
class DataError : public Error {
 public:
  using Error::Error;
};

/// The record carries no usable signal.
class NoSignalError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace uwb
