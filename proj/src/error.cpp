#include "lze/error.hpp"

namespace lze {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::UnknownPrompt: return "UnknownPrompt";
    case ErrorCode::NotActive: return "NotActive";
    case ErrorCode::NotPruned: return "NotPruned";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::InvalidInputs: return "InvalidInputs";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::InvalidDecay: return "InvalidDecay";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::InvalidRatio: return "InvalidRatio";
    case ErrorCode::MismatchedGroup: return "MismatchedGroup";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidTokenCount: return "InvalidTokenCount";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::OutOfOrderStep: return "OutOfOrderStep";
    case ErrorCode::UnknownPromptBeforeInit: return "UnknownPromptBeforeInit";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace lze
