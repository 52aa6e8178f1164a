#include "parallax/error.hpp"

namespace parallax {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::DegeneratePlane: return "DegeneratePlane";
    case ErrorCode::MapsToInfinity: return "MapsToInfinity";
    case ErrorCode::ParallaxSingularity: return "ParallaxSingularity";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::SingularHomography: return "SingularHomography";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::EpipoleDegeneracy: return "EpipoleDegeneracy";
    case ErrorCode::SingularRatio: return "SingularRatio";
    case ErrorCode::ZeroTranslation: return "ZeroTranslation";
    case ErrorCode::PatchTooLarge: return "PatchTooLarge";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::EmptyBucket: return "EmptyBucket";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::IncongruentGrids: return "IncongruentGrids";
  }
  return "Unknown";
}

}  // namespace parallax
