#pragma once

#include <stdexcept>
#include <string>

namespace wim {

// Invalid distribution/prior parameters or arguments outside an operation's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Input that could not be parsed (prior strings, dataset files, spec files).
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : std::invalid_argument(format(what, line, column)), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return what;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
  }
  int line_;
  int column_;
};

// Base for failures of the numerical machinery itself.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ImproperPosteriorError : public NumericError {
 public:
  using NumericError::NumericError;
};

class UnsupportedError : public NumericError {
 public:
  using NumericError::NumericError;
};

class IntegrationError : public NumericError {
 public:
  IntegrationError(const std::string& what, double achieved)
      : NumericError(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

class CapacityError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DimensionError : public NumericError {
 public:
  using NumericError::NumericError;
};

class SamplerError : public NumericError {
 public:
  using NumericError::NumericError;
};

class EvaluationError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace wim
