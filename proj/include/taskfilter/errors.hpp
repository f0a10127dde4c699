#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taskfilter {

enum class ErrorCode {
  // input validation
  kParseError,
  kDuplicateTask,
  kDuplicateRun,
  kInvalidDescriptor,
  kInvalidQuality,
  kUnknownTask,
  kArityMismatch,
  kConfigError,
  kAccessDenied,
  // data / runtime
  kNoRuns,
  kEmptyQualities,
  kDomainError,
  kMissingDescriptor,
  kEmptyTrainingSet,
  kInsufficientHoldoutRuns,
  kInsufficientSetups,
  kLengthMismatch,
  kEmptyTrainSet,
  kEmptyFilterOutput,
  kInfeasiblePartition,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Validation errors are problems with the caller's inputs (files, config,
// access policy); everything else is a data/runtime failure.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the error-code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace taskfilter
