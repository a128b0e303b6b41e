#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ensconv {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of paired arrays disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A class-wise statistic was requested for a class with no evaluation points.
class EmptyClassError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration (replicate count, flags, tree parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Line and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t column,
             const std::string& what)
      : Error(format(source, line, column, what)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& source, std::size_t line,
                            std::size_t column, const std::string& what) {
    std::string msg = source;
    if (line > 0) {
      msg += ":" + std::to_string(line);
      if (column > 0) msg += ":" + std::to_string(column);
    }
    return msg + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

}  // namespace ensconv
