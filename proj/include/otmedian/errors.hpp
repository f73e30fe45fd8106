#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace otmedian {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an argument violates a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Raised by the exact LP solver when an instance exceeds its size guard.
class SizeGuardError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// An iterative solver ran out of iterations. `residual` is the last value of
/// whatever the solver was trying to drive below its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + format(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  double residual_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content; `offset` is the byte position where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at byte offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace otmedian
