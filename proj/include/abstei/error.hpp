#pragma once

#include <stdexcept>
#include <string>

namespace abstei {

enum class ErrorCode {
  FileNotFound,
  MissingColumn,
  ParseError,
  NonPositiveValue,
  LoadFactorOutOfRange,
  DuplicateKey,
  InvalidSpec,
  RankDeficientRestrictions,
  InconsistentRestrictions,
  NonFiniteLikelihood,
  DimensionMismatch,
  UnknownHypothesis,
  NotNested,
  DegenerateScale,
  InvalidTruth,
  InvalidConfig,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::LoadFactorOutOfRange: return "LoadFactorOutOfRange";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::RankDeficientRestrictions: return "RankDeficientRestrictions";
    case ErrorCode::InconsistentRestrictions: return "InconsistentRestrictions";
    case ErrorCode::NonFiniteLikelihood: return "NonFiniteLikelihood";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownHypothesis: return "UnknownHypothesis";
    case ErrorCode::NotNested: return "NotNested";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::InvalidTruth: return "InvalidTruth";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace abstei
