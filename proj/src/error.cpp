#include "capvton/error.hpp"

namespace capvton {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kContractViolation: return "ContractViolation";
    case ErrorCode::kExtractorContractViolation: return "ExtractorContractViolation";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kEmptyInput: return "EmptyInput";
  }
  return "Unknown";
}

std::string_view to_string(WarningCode code) {
  switch (code) {
    case WarningCode::kMissingRegion: return "MissingRegion";
    case WarningCode::kDegeneratePose: return "DegeneratePose";
    case WarningCode::kEmptySkinRegion: return "EmptySkinRegion";
    case WarningCode::kUnreliableTone: return "UnreliableTone";
    case WarningCode::kInsufficientSamples: return "InsufficientSamples";
    case WarningCode::kItemFailed: return "ItemFailed";
  }
  return "Unknown";
}

ErrorCode parse_error_code(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kEmptyInput); ++i) {
    if (to_string(static_cast<ErrorCode>(i)) == name) return static_cast<ErrorCode>(i);
  }
  throw Error(ErrorCode::kFormatError, "unknown error code '" + std::string(name) + "'");
}

WarningCode parse_warning_code(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(WarningCode::kItemFailed); ++i) {
    if (to_string(static_cast<WarningCode>(i)) == name) return static_cast<WarningCode>(i);
  }
  throw Error(ErrorCode::kFormatError, "unknown warning code '" + std::string(name) + "'");
}

}  // namespace capvton
