#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace capvton {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kIoError,
  kFormatError,
  kBackendUnavailable,
  kContractViolation,
  kExtractorContractViolation,
  kNumericalFailure,
  kInsufficientSamples,
  kMissingFile,
  kEmptyDataset,
  kEmptyInput,
};

std::string_view to_string(ErrorCode code);
ErrorCode parse_error_code(std::string_view name);

// Every failure the library reports is an Error carrying a code, so batch
// drivers can record per-item failures without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class WarningCode {
  kMissingRegion,
  kDegeneratePose,
  kEmptySkinRegion,
  kUnreliableTone,
  kInsufficientSamples,
  kItemFailed,
};

std::string_view to_string(WarningCode code);
WarningCode parse_warning_code(std::string_view name);

struct Warning {
  WarningCode code;
  std::string message;

  bool operator==(const Warning&) const = default;
};

using Warnings = std::vector<Warning>;

// A value plus the non-fatal conditions hit while producing it.
template <typename T>
struct WithWarnings {
  T value;
  Warnings warnings;

  bool has(WarningCode code) const {
    for (const auto& w : warnings) {
      if (w.code == code) return true;
    }
    return false;
  }
};

inline void append(Warnings& into, const Warnings& from) {
  into.insert(into.end(), from.begin(), from.end());
}

}  // namespace capvton
