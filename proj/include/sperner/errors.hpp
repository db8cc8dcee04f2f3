#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace sperner {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A map produced a value outside the closed infinite simplex.
class MapRangeError : public Error {
 public:
  using Error::Error;
};
using RangeViolation = MapRangeError;

class DivisionByZero : public Error {
 public:
  using Error::Error;
};

/// Enumeration or traversal would exceed the configured cell budget.
class ResourceCapExceeded : public Error {
 public:
  ResourceCapExceeded(std::string what, std::size_t cap)
      : Error(std::move(what)), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

class UnknownBuiltin : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant (e.g. a labelling changed under a running walk).
class InternalError : public Error {
 public:
  using Error::Error;
};

/// Parse failure with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        message_(message),
        line_(line),
        column_(column) {}

  const std::string& message() const noexcept { return message_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

class SyntaxError : public ParseError {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column,
              std::set<std::string> expected)
      : ParseError(message, line, column), expected_(std::move(expected)) {}

  const std::set<std::string>& expected() const noexcept { return expected_; }

 private:
  std::set<std::string> expected_;
};

class UndeclaredVariable : public ParseError {
 public:
  using ParseError::ParseError;
};

class EmptyComponentList : public ParseError {
 public:
  using ParseError::ParseError;
};

}  // namespace sperner
