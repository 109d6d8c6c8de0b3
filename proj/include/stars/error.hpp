#pragma once

#include <stdexcept>
#include <string>

namespace stars {

enum class ErrorCode {
  NotPositiveDefinite,
  DimensionMismatch,
  NonFinite,
  InvalidBlockSize,
  InvalidRho,
  InvalidGroupSize,
  InvalidArgument,
  Config,
  Io,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Same code, message prefixed with where it happened ("subsample 12: ...").
  Error annotated(const std::string& context) const {
    return Error(code_, context + ": " + what());
  }

 private:
  ErrorCode code_;
};

}  // namespace stars
