#pragma once

#include <stdexcept>
#include <string>

namespace ntnprs {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidGeometry,
  kAliasing,
  kFit,
  kRegression,
  kEvaluation,
  kConfig,
  kGeometryConfig,
  kIo,
  kLoad,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidGeometry: return "invalid-geometry";
    case ErrorCode::kAliasing: return "aliasing";
    case ErrorCode::kFit: return "fit";
    case ErrorCode::kRegression: return "regression";
    case ErrorCode::kEvaluation: return "evaluation";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kGeometryConfig: return "geometry";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kLoad: return "load";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Process exit code for a failure category, as used by the command-line front end.
inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kRegression: return 2;
    case ErrorCode::kGeometryConfig:
    case ErrorCode::kInvalidGeometry: return 3;
    case ErrorCode::kIo:
    case ErrorCode::kLoad: return 4;
    default: return 1;
  }
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace ntnprs
