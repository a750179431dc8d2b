#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace setfusion {

enum class ErrorCode {
  // numeric
  NonSymmetric,
  NonFinite,
  NotPositiveDefinite,
  RankDeficient,
  NormalizationDegenerate,
  NonFiniteGradient,
  DegenerateDenominator,
  ZeroTotalScatter,
  BadDimension,
  ShapeMismatch,
  IndexOutOfRange,
  // data
  TooFewSamples,
  DimensionMismatch,
  SingleClassGallery,
  InsufficientSetsPerClass,
  ParseError,
  IoError,
  FormatVersionMismatch,
  ChecksumMismatch,
  // usage
  BadSpec,
  InvalidConfig,
};

/// Coarse grouping used to pick the CLI exit code.
enum class ErrorCategory { Usage, Data, Numeric };

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category_of(ErrorCode code) noexcept;

/// Exit code convention of the command-line tool: 2 usage, 3 data, 4 numeric.
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace setfusion
