#pragma once

#include <stdexcept>
#include <string>

namespace attnpipe {

enum class ErrorCode {
  MissingFile,
  MalformedRow,
  InvariantViolation,
  IoFailure,
  InvalidBand,
  TooShort,
  TooFewGoodChannels,
  BandOutOfRange,
  DegenerateEpoch,
  DimensionMismatch,
  SingularComposite,
  SingleClassTraining,
  NameMismatch,
  TooFewWindows,
  TooFewTrials,
  UnknownParticipant,
  InvalidAlpha,
  DegenerateVariance,
  TrialOutOfBounds,
  InvalidConfig,
  ConfigInvalid,
  MissingGaze,
  BindFailure,
  ConnectionLost,
  ModelMismatch,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace attnpipe
