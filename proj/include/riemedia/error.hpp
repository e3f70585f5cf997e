#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riemedia {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed DSL source. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("syntax error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Unbound variable or a domain fault (log of non-positive, division by zero, ...).
class EvalError : public Error {
 public:
  enum class Kind { unbound_variable, domain_fault };

  EvalError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ThermoError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, std::size_t step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace riemedia
