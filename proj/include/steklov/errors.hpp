#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace steklov {

/// Failure categories raised by the library. Every thrown steklov::Error
/// carries exactly one of these.
enum class ErrorCode {
  kInvalidGrid,
  kAliasing,
  kNonPositiveWeight,
  kNonRealWeight,
  kMeanNotOne,
  kNotNormalized,
  kBandwidthExceeded,
  kNegativeEigenvalue,
  kEigenSolverFailure,
  kPoleAtOne,
  kUnsupportedArgument,
  kEstimatorDivergence,
  kNoWitness,
  kNonZeroSum,
  kBudgetExceeded,
  kVanishingDerivative,
  kUnknownGallery,
  kConfigError,
  kParseError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidGrid: return "InvalidGrid";
    case ErrorCode::kAliasing: return "Aliasing";
    case ErrorCode::kNonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::kNonRealWeight: return "NonRealWeight";
    case ErrorCode::kMeanNotOne: return "MeanNotOne";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kBandwidthExceeded: return "BandwidthExceeded";
    case ErrorCode::kNegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::kEigenSolverFailure: return "EigenSolverFailure";
    case ErrorCode::kPoleAtOne: return "PoleAtOne";
    case ErrorCode::kUnsupportedArgument: return "UnsupportedArgument";
    case ErrorCode::kEstimatorDivergence: return "EstimatorDivergence";
    case ErrorCode::kNoWitness: return "NoWitness";
    case ErrorCode::kNonZeroSum: return "NonZeroSum";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kVanishingDerivative: return "VanishingDerivative";
    case ErrorCode::kUnknownGallery: return "UnknownGallery";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace steklov
