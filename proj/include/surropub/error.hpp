#pragma once

#include <stdexcept>
#include <string>

namespace surropub {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised by the schema and SCM document parsers; carries 1-based location.
class ParseError : public Error {
public:
  ParseError(std::string message, std::size_t line, std::size_t column)
      : Error(message + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  explicit ParseError(std::string message) : Error(std::move(message)) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_ = 0;
  std::size_t column_ = 0;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace surropub
