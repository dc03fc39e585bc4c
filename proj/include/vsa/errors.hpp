#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vsa {

// Root of every error the simulator raises. Callers that only need to report
// a failure can catch this; the CLI maps the concrete types to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Membrane or bias arithmetic left the configured fixed-point range.
class FixedPointOverflow : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

class CapacityFault : public Error {
 public:
  using Error::Error;
};

class ReadBeforeWriteFault : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class BundleErrorKind { kBadMagic, kChecksum, kTruncated, kFormat };

class BundleError : public IoError {
 public:
  BundleError(BundleErrorKind kind, const std::string& what) : IoError(what), kind_(kind) {}
  BundleErrorKind kind() const { return kind_; }

 private:
  BundleErrorKind kind_;
};

}  // namespace vsa
