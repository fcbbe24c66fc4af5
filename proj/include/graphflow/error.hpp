#pragma once

#include <stdexcept>
#include <string>

namespace graphflow {

// Base class for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent user input (config files, presets, declared constants).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Syntax error in an expression or config file, with a 1-based position.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, int line, int column)
      : ConfigError(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Expression evaluated outside its domain (sqrt of a negative, division by zero, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A time step larger than the positivity-preserving bound.
class CflError : public Error {
 public:
  using Error::Error;
};

}  // namespace graphflow
