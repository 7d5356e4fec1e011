#include "common/error.hpp"

namespace lap {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Validation: return "validation error";
    case ErrorCode::Coverage: return "coverage error";
    case ErrorCode::Duplicate: return "duplicate error";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Numeric: return "numeric error";
    case ErrorCode::Internal: return "internal error";
  }
  return "unknown error";
}

}  // namespace lap
