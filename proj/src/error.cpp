#include "rulecky/error.hpp"

namespace rulecky {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnbalancedParens: return "UnbalancedParens";
    case ErrorCode::EmptyNode: return "EmptyNode";
    case ErrorCode::LeafWithoutWord: return "LeafWithoutWord";
    case ErrorCode::MalformedNode: return "MalformedNode";
    case ErrorCode::EmptySentence: return "EmptySentence";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::LabelOutOfVocab: return "LabelOutOfVocab";
    case ErrorCode::EmptyRuleSet: return "EmptyRuleSet";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::NonFiniteScore: return "NonFiniteScore";
    case ErrorCode::InconsistentChart: return "InconsistentChart";
    case ErrorCode::NoDerivation: return "NoDerivation";
    case ErrorCode::NonFiniteParameter: return "NonFiniteParameter";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::YieldMismatch: return "YieldMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::size_t position)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code),
      position_(position) {}

}  // namespace rulecky
