#pragma once

#include <stdexcept>
#include <string>

namespace tailcert {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unsupported configuration (e.g. singular covariance where
/// an inverse square root is required).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Inputs that contradict each other (e.g. violate Cauchy-Schwarz).
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// An iterative numeric routine failed to reach its tolerance.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The scalar search saw too many non-finite objective values.
class SearchFailure : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Parameters for which a bound is vacuous (e.g. a non-positive lower
/// confidence value for the boundary functional).
class DegenerateParameters : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Schema violation in a JSON document; carries the offending field path.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tailcert
