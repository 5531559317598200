#include "critflow/error.hpp"

namespace critflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DegenerateOperator: return "DegenerateOperator";
    case ErrorCode::MaxRefinement: return "MaxRefinement";
    case ErrorCode::NotStabilized: return "NotStabilized";
    case ErrorCode::OutOfMemory: return "OutOfMemory";
    case ErrorCode::ThresholdOnGrid: return "ThresholdOnGrid";
    case ErrorCode::NotIsolated: return "NotIsolated";
    case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorCode::SingularLevel: return "SingularLevel";
    case ErrorCode::FloorViolated: return "FloorViolated";
    case ErrorCode::StepUnstable: return "StepUnstable";
    case ErrorCode::TrackingStalled: return "TrackingStalled";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::DirectionOutsideTruncation: return "DirectionOutsideTruncation";
    case ErrorCode::ManifestError: return "ManifestError";
  }
  return "Unknown";
}

}  // namespace critflow
