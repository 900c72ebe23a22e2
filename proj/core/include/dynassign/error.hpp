#pragma once

#include <stdexcept>
#include <string>

namespace dynassign {

// Failure classes shared by the library, the service and the CLI. The CLI
// maps them onto exit codes 1, 2 and 3 respectively.
enum class ErrorCode {
  kValidation,
  kInfeasible,
  kIo,
};

const char* ToString(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void ThrowValidation(const std::string& message) {
  throw Error(ErrorCode::kValidation, message);
}
[[noreturn]] inline void ThrowInfeasible(const std::string& message) {
  throw Error(ErrorCode::kInfeasible, message);
}
[[noreturn]] inline void ThrowIo(const std::string& message) {
  throw Error(ErrorCode::kIo, message);
}

}  // namespace dynassign
