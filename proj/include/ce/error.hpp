#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ce {

enum class ErrorCode {
  DimensionMismatch,
  SingularMatrix,
  RankDeficient,
  NoConvergence,
  NotPositiveDefinite,
  BadPreconditioner,
  SingularJacobian,
  SingularSystem,
  InvalidArgument,
  IoError,
  BadImage,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::BadPreconditioner: return "BadPreconditioner";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BadImage: return "BadImage";
  }
  return "Unknown";
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace ce
