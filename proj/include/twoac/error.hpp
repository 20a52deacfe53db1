#pragma once

#include <stdexcept>
#include <string>

namespace twoac {

enum class ErrorCode {
  AllCheiralityFail,
  DegenerateRay,
  NormalEstimationFailed,
  InterpolationIllConditioned,
  ZeroPolynomial,
  DegenerateConfiguration,
  NoRealRoot,
  EmptyPool,
  FieldOfViewExhausted,
  PlaneThroughCenter,
  InsufficientCorrespondences,
  NoSurvivingRoots,
  ParseError,
  IoError,
  InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AllCheiralityFail: return "AllCheiralityFail";
    case ErrorCode::DegenerateRay: return "DegenerateRay";
    case ErrorCode::NormalEstimationFailed: return "NormalEstimationFailed";
    case ErrorCode::InterpolationIllConditioned: return "InterpolationIllConditioned";
    case ErrorCode::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NoRealRoot: return "NoRealRoot";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::FieldOfViewExhausted: return "FieldOfViewExhausted";
    case ErrorCode::PlaneThroughCenter: return "PlaneThroughCenter";
    case ErrorCode::InsufficientCorrespondences: return "InsufficientCorrespondences";
    case ErrorCode::NoSurvivingRoots: return "NoSurvivingRoots";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above so
// callers can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failures remember the 1-based line they occurred on.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace twoac
