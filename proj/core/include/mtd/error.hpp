#pragma once

#include <stdexcept>
#include <string>

namespace mtd {

/// Error families. Each maps onto one process exit code in the CLI.
enum class ErrorCode {
  kConfig,      // invalid parameters, shape/bounds mismatches
  kPacking,     // placement density not achievable
  kDivergence,  // non-finite optimizer iterate
  kNumeric,     // non-finite values elsewhere (e.g. corrupt weights)
  kFormat,      // malformed or truncated file contents
  kIo,          // filesystem failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};

class ShapeError : public ConfigError {
 public:
  explicit ShapeError(const std::string& what) : ConfigError("shape error: " + what) {}
};

class BoundsError : public ConfigError {
 public:
  explicit BoundsError(const std::string& what) : ConfigError("bounds error: " + what) {}
};

/// Quantity is mathematically undefined for the given input (e.g. relative
/// error against an all-zero reference).
class UndefinedError : public ConfigError {
 public:
  explicit UndefinedError(const std::string& what) : ConfigError("undefined: " + what) {}
};

class PackingError : public Error {
 public:
  PackingError(const std::string& what, long achieved, long requested)
      : Error(ErrorCode::kPacking, what), achieved_(achieved), requested_(requested) {}

  long achieved() const noexcept { return achieved_; }
  long requested() const noexcept { return requested_; }

 private:
  long achieved_;
  long requested_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCode::kNumeric, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCode::kFormat, what) {}
};

/// Payload shorter than its header promises.
class LengthError : public FormatError {
 public:
  explicit LengthError(const std::string& what) : FormatError("truncated: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

/// Process exit code for an error family (0 is reserved for success).
int exit_code_for(ErrorCode code) noexcept;

}  // namespace mtd
