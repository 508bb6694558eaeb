#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wmfcc {

enum class ErrorCode {
  MalformedFile,
  UnsupportedFormat,
  ZeroSignalPower,
  SignalTooShort,
  EmptySignal,
  LevelTooDeep,
  LengthMismatch,
  NegativeFrequency,
  DegenerateBand,
  BadLength,
  EmptySequence,
  DimensionMismatch,
  EmptyTemplateSet,
  SequenceTooShort,
  EmptyTrainingSet,
  EmptyModelSet,
  FeatureKindMismatch,
  BadParams,
  BadConfig,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::ZeroSignalPower: return "ZeroSignalPower";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::LevelTooDeep: return "LevelTooDeep";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NegativeFrequency: return "NegativeFrequency";
    case ErrorCode::DegenerateBand: return "DegenerateBand";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyTemplateSet: return "EmptyTemplateSet";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::EmptyModelSet: return "EmptyModelSet";
    case ErrorCode::FeatureKindMismatch: return "FeatureKindMismatch";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// All library failures are reported through this type; code() identifies the
// failure class, what() carries the human-readable context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace wmfcc
