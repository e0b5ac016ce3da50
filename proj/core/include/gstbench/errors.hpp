#pragma once

#include <stdexcept>
#include <string>

namespace gst {

enum class ErrorCode {
  InvalidArgument,
  InvalidState,
  InvalidConfiguration,
  CorruptDataset,
  UnsupportedVersion,
  EmptySupport,
  IoError,
};

// All recoverable failures surface as Error; the CLI maps codes to exit
// statuses and a machine-readable diagnostic line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

  static const char* code_name(ErrorCode c) {
    switch (c) {
      case ErrorCode::InvalidArgument: return "invalid-argument";
      case ErrorCode::InvalidState: return "invalid-state";
      case ErrorCode::InvalidConfiguration: return "invalid-configuration";
      case ErrorCode::CorruptDataset: return "corrupt-dataset";
      case ErrorCode::UnsupportedVersion: return "unsupported-version";
      case ErrorCode::EmptySupport: return "empty-support";
      case ErrorCode::IoError: return "io-error";
    }
    return "unknown";
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace gst
