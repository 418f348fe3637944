#pragma once

#include <stdexcept>
#include <string>

namespace jkoflow {

/// Error categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
  kDomain = 1,
  kInvalidArgument,
  kConstraintViolation,
  kNoSolution,
  kStepFailure,
  kCflViolation,
  kOracleFailure,
  kIo,
  kConfig,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// The const char* overload keeps hot paths free of string construction.
inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace jkoflow
