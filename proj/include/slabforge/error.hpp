#pragma once

#include <stdexcept>
#include <string>

namespace slabforge {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violations on operation inputs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A mesh motion produced inverted elements; the caller must reduce the step.
class MotionRejected : public Error {
 public:
  using Error::Error;
};

/// A space-time slab failed a conformity requirement.
class ConformityError : public Error {
 public:
  using Error::Error;
};

/// An iterative solve exceeded its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// File reading/writing failures.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Configuration file problems, with the offending line when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  explicit ConfigError(const std::string& message) : ConfigError(message, 0) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

/// Text parse failures, with the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error(message + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_ = 0;
};

}  // namespace slabforge
