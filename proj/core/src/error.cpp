#include "pbeam/error.hpp"

namespace pbeam {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::A2Violation: return "A2Violation";
    case ErrorCode::CalibrationFailed: return "CalibrationFailed";
    case ErrorCode::DiscretizationTooCoarse: return "DiscretizationTooCoarse";
    case ErrorCode::EigensolveFailure: return "EigensolveFailure";
    case ErrorCode::InsufficientModes: return "InsufficientModes";
    case ErrorCode::InvalidFrequency: return "InvalidFrequency";
    case ErrorCode::DegenerateTolerance: return "DegenerateTolerance";
    case ErrorCode::NotInRange: return "NotInRange";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::AliasRisk: return "AliasRisk";
    case ErrorCode::A3Unverified: return "A3Unverified";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::MonitorBlowup: return "MonitorBlowup";
    case ErrorCode::BoundViolation: return "BoundViolation";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace pbeam
