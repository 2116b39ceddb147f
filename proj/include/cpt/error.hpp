#pragma once

#include <stdexcept>
#include <string>

namespace cpt {

enum class ErrorCode {
  InvalidArg = 1,
  Io,
  Config,
  FixtureMissing,
  FixtureAnswerMismatch,
  NoOccurrenceFound,
  AnswerTooShort,
  NoReflectionSegment,
  NoVerificationSegment,
  NoInsertionPoint,
  TemplateMissing,
  PrefixUnsupported,
  AuthFailure,
  RateLimitedExhausted,
  TransportFailure,
  ReplayMiss,
  NoAnswerFound,
  EmptyInput,
  UnknownProfile,
  Backend,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cpt
