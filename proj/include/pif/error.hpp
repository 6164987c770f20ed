#pragma once

#include <stdexcept>
#include <string>

namespace pif {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  Unreadable,
  UnsupportedFormat,
  Decode,
  ZeroDimension,
  Io,
  DegenerateImage,
  TypeMismatch,
  Schema,
  VersionMismatch,
  OutOfRange,
  NotFound,
  Conflict,
};

const char* to_string(ErrorCode code);

// Every recoverable failure in the library surfaces as pif::Error; callers
// dispatch on code() rather than parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pif
