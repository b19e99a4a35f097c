#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nctomo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input; `line()` is 1-based (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input that is well-formed but violates a model precondition
/// (cycle, disconnected graph, unknown edge id, incompatible mode...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An exponential-size enumeration was refused by its guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace nctomo
