#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace laserpick {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violated a documented precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The colour-calibration palette could not be observed.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Query outside the sampled domain of a dataset (no extrapolation).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Laser operating point below the lowest measured lateral velocity.
class UnsupportedRegimeError : public Error {
 public:
  using Error::Error;
};

/// Gantry target outside travel limits, or a command the hardware would refuse.
class MotionError : public Error {
 public:
  using Error::Error;
};

/// Approach waypoints cannot be reached for a detected fruit.
class PlanningError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace laserpick
