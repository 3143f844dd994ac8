#pragma once

#include <stdexcept>
#include <string>

namespace qforest {

enum class ErrorCode {
  InvalidLetter,
  LengthMismatch,
  CapExceeded,
  DimensionMismatch,
  InvalidArgument,
  Duplicate,
  OutOfRange,
  ContractViolation,
  UnknownState,
  Malformed,
  VersionMismatch,
  QubitMismatch,
  DegenerateEnsemble,
  MissingEntries,
  NotFound,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidLetter: return "InvalidLetter";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Duplicate: return "Duplicate";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ContractViolation: return "ContractViolation";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::Malformed: return "Malformed";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::QubitMismatch: return "QubitMismatch";
    case ErrorCode::DegenerateEnsemble: return "DegenerateEnsemble";
    case ErrorCode::MissingEntries: return "MissingEntries";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qforest
