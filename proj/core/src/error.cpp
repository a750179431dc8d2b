#include "setfusion/error.hpp"

namespace setfusion {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NormalizationDegenerate: return "NormalizationDegenerate";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::ZeroTotalScatter: return "ZeroTotalScatter";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClassGallery: return "SingleClassGallery";
    case ErrorCode::InsufficientSetsPerClass: return "InsufficientSetsPerClass";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadSpec:
    case ErrorCode::InvalidConfig:
      return ErrorCategory::Usage;
    case ErrorCode::TooFewSamples:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::SingleClassGallery:
    case ErrorCode::InsufficientSetsPerClass:
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
    case ErrorCode::FormatVersionMismatch:
    case ErrorCode::ChecksumMismatch:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Numeric;
  }
}

int exit_code_for(ErrorCode code) noexcept {
  switch (category_of(code)) {
    case ErrorCategory::Usage: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Numeric: return 4;
  }
  return 4;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace setfusion
