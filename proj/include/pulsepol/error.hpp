#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pulsepol {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameter or precondition violation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Operands whose dimensions do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numerical check (Hermiticity, unitarity, convergence) did not hold.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Configuration problem; `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Sequence text that does not match the grammar. Positions are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace pulsepol
