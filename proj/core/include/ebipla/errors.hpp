#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ebipla {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatch between two operands. `axis()` names the offending axis.
class DimensionError : public Error {
 public:
  DimensionError(std::string axis, std::size_t expected, std::size_t actual);

  const std::string& axis() const noexcept { return axis_; }
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::string axis_;
  std::size_t expected_;
  std::size_t actual_;
};

/// Invalid configuration or a model that lacks a capability the run requires.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A value became non-finite, or an iterate left the divergence guard radius.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A Langevin chain exceeded the divergence guard.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Malformed, truncated or version-mismatched file.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ebipla
