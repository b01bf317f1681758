#include "hsgp/errors.hpp"

namespace hsgp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::TooFewTimepoints: return "TooFewTimepoints";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::WindowLeavesTooFew: return "WindowLeavesTooFew";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::NonFiniteParams: return "NonFiniteParams";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::EmptyKeptSet: return "EmptyKeptSet";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ZeroNormEmbedding: return "ZeroNormEmbedding";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::EpochOutOfRange: return "EpochOutOfRange";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::InconsistentChain: return "InconsistentChain";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::DataError: return "DataError";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidTarget:
    case ErrorCode::KOutOfRange:
    case ErrorCode::EpochOutOfRange:
      return ErrorClass::Config;
    case ErrorCode::NonFiniteParams:
    case ErrorCode::NonFiniteGradient:
    case ErrorCode::ZeroNormEmbedding:
    case ErrorCode::ZeroMatrix:
      return ErrorClass::Numeric;
    default:
      return ErrorClass::Data;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(ErrorCode code, std::size_t row, std::size_t col, const std::string& message)
    : Error(code, message + " (row " + std::to_string(row) + ", col " + std::to_string(col) + ")"),
      row_(row),
      col_(col) {}

}  // namespace hsgp
