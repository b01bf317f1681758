#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hsgp {

enum class ErrorCode {
  MissingFile,
  ParseError,
  NonFiniteValue,
  TooFewTimepoints,
  WindowTooLarge,
  WindowLeavesTooFew,
  ShapeMismatch,
  ZeroMatrix,
  EmptyDataset,
  AsymmetricInput,
  NonFiniteParams,
  KOutOfRange,
  EmptyKeptSet,
  IndexOutOfRange,
  ZeroNormEmbedding,
  BatchTooSmall,
  LabelOutOfRange,
  NonFiniteGradient,
  EpochOutOfRange,
  InvalidTarget,
  InconsistentChain,
  InvalidSpec,
  ConfigError,
  DataError,
};

std::string_view to_string(ErrorCode code);

/// Broad failure class used for CLI exit codes.
enum class ErrorClass { Config, Data, Numeric };

ErrorClass classify(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Row/column-tagged parse failure (0-based file coordinates).
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t row, std::size_t col, const std::string& message);

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

}  // namespace hsgp
