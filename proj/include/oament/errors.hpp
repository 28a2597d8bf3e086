#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oament {

/// Base of every error thrown by the library. The three direct subclasses map
/// onto the command-line exit codes (2 validation, 3 numerical, 4 I/O).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 3; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

// state
class NormalizationError : public ValidationError { using ValidationError::ValidationError; };
class InvalidTransferError : public ValidationError { using ValidationError::ValidationError; };
class AnalyzerMismatchError : public ValidationError { using ValidationError::ValidationError; };

// slm
class InvalidCenterError : public ValidationError { using ValidationError::ValidationError; };
class UnderResolutionError : public NumericalError { using NumericalError::NumericalError; };
class NoSignalError : public NumericalError { using NumericalError::NumericalError; };

// mask
class MaskMismatchError : public ValidationError { using ValidationError::ValidationError; };

// counts / metrology
class FitError : public NumericalError { using NumericalError::NumericalError; };
class UndefinedVisibilityError : public NumericalError { using NumericalError::NumericalError; };
class CannotCorrectError : public ValidationError { using ValidationError::ValidationError; };
class OutOfRangeError : public NumericalError { using NumericalError::NumericalError; };

/// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public ParseError { using ParseError::ParseError; };

}  // namespace oament
