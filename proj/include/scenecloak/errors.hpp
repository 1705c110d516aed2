#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scenecloak {

/// Root of every error the library throws.
///
/// `is_validation()` separates caller mistakes (bad input, bad shape, bad
/// file) from runtime failures (I/O, subprocess, numerics); the CLI maps the
/// first to exit code 1 and the second to exit code 2.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual bool is_validation() const { return false; }
};

class ValidationError : public Error {
public:
  using Error::Error;
  bool is_validation() const override { return true; }
};

class ShapeError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class GapError : public ValidationError {
public:
  explicit GapError(std::size_t missing)
      : ValidationError("missing frame index " + std::to_string(missing)),
        index(missing) {}
  std::size_t index;
};

class FormatError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class MismatchError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
public:
  using Error::Error;
};

class ProtocolError : public Error {
public:
  using Error::Error;
};

class NumericalError : public Error {
public:
  NumericalError(const std::string &what, int iter)
      : Error(what + " (iteration " + std::to_string(iter) + ")"),
        iteration(iter) {}
  int iteration;
};

/// No meaningful answer exists for the input (e.g. a threshold over an
/// all-zero histogram, a speedup over zero elapsed time).
class DegenerateError : public Error {
public:
  using Error::Error;
};

} // namespace scenecloak
