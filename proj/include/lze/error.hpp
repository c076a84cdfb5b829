#pragma once

#include <stdexcept>
#include <string>

namespace lze {

// Every failure surfaced by the library carries one of these codes. The CLI
// maps them onto process exit codes (see exit_code_for).
enum class ErrorCode {
  EmptyPool,
  InvalidProbability,
  UnknownPrompt,
  NotActive,
  NotPruned,
  EmptyGroup,
  InvalidInputs,
  EmptyHistory,
  InvalidDecay,
  InsufficientHistory,
  InvalidRatio,
  MismatchedGroup,
  InvalidParams,
  InvalidTokenCount,
  ParseError,
  ValidationError,
  OutOfOrderStep,
  UnknownPromptBeforeInit,
  MalformedLine,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lze
