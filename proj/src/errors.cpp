#include "taskfilter/errors.hpp"

namespace taskfilter {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateTask: return "DuplicateTask";
    case ErrorCode::kDuplicateRun: return "DuplicateRun";
    case ErrorCode::kInvalidDescriptor: return "InvalidDescriptor";
    case ErrorCode::kInvalidQuality: return "InvalidQuality";
    case ErrorCode::kUnknownTask: return "UnknownTask";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kAccessDenied: return "AccessDenied";
    case ErrorCode::kNoRuns: return "NoRuns";
    case ErrorCode::kEmptyQualities: return "EmptyQualities";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kMissingDescriptor: return "MissingDescriptor";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kInsufficientHoldoutRuns: return "InsufficientHoldoutRuns";
    case ErrorCode::kInsufficientSetups: return "InsufficientSetups";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::kEmptyFilterOutput: return "EmptyFilterOutput";
    case ErrorCode::kInfeasiblePartition: return "InfeasiblePartition";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kDuplicateTask:
    case ErrorCode::kDuplicateRun:
    case ErrorCode::kInvalidDescriptor:
    case ErrorCode::kInvalidQuality:
    case ErrorCode::kUnknownTask:
    case ErrorCode::kArityMismatch:
    case ErrorCode::kConfigError:
    case ErrorCode::kAccessDenied:
      return true;
    default:
      return false;
  }
}

}  // namespace taskfilter
