#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rulecky {

enum class ErrorCode {
  UnbalancedParens,
  EmptyNode,
  LeafWithoutWord,
  MalformedNode,
  EmptySentence,
  LengthMismatch,
  IndexOutOfRange,
  LabelOutOfVocab,
  EmptyRuleSet,
  EmptyTestSet,
  NonFiniteScore,
  InconsistentChart,
  NoDerivation,
  NonFiniteParameter,
  DimensionMismatch,
  YieldMismatch,
  IoError,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception. `position` is a byte offset for parse errors and a
/// sentence index for corpus-level errors; zero when not meaningful.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t position = 0);

  ErrorCode code() const { return code_; }
  std::size_t position() const { return position_; }

 private:
  ErrorCode code_;
  std::size_t position_;
};

}  // namespace rulecky
