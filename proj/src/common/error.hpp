#pragma once

#include <stdexcept>
#include <string>

namespace lap {

enum class ErrorCode {
  InvalidArgument = 1,
  Validation = 2,
  Coverage = 3,
  Duplicate = 4,
  Io = 5,
  Parse = 6,
  Numeric = 7,
  Internal = 8,
};

const char* error_code_name(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. The C API maps the code
/// one-to-one onto its status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace lap
