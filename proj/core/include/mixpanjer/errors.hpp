#pragma once

#include <stdexcept>
#include <string>

namespace mixpanjer {

// Base of every error raised by the library. Configuration-type errors map to
// CLI exit code 2, numerical ones to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- configuration / input errors ---

class DomainError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class UnsupportedLawError : public Error {
 public:
  using Error::Error;
};

class InsufficientPathsError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// --- numerical errors ---

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DenominatorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace mixpanjer
