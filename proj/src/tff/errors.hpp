#pragma once

#include <stdexcept>
#include <string>

namespace tff {

// One code per failure class; mirrored one-to-one by the C API status enum.
enum class ErrorCode {
  Ok = 0,
  EmptyName,
  InvalidSpec,
  ShotCountOutOfRange,
  UnknownUnit,
  RuleNotFound,
  RuleFileInvalid,
  AliasCycle,
  NetworkError,
  AuthError,
  RateLimited,
  FixtureMiss,
  UnstableSimulation,
  TraceTooShort,
  SafetyViolation,
  IoError,
  SchemaMismatch,
  InvalidArgument,
  Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tff
