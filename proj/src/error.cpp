#include "covhess/error.hpp"

namespace covhess {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonBinaryLabel: return "NonBinaryLabel";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::TooFewClassMembers: return "TooFewClassMembers";
    case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::FoldMismatch: return "FoldMismatch";
    case ErrorCode::MissingModel: return "MissingModel";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ZeroOverallVariance: return "ZeroOverallVariance";
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::ZeroMeanDifference: return "ZeroMeanDifference";
    case ErrorCode::NonPositiveLeadingEigenvalue: return "NonPositiveLeadingEigenvalue";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::NonFiniteCurvature: return "NonFiniteCurvature";
    case ErrorCode::SingularScatterMatrix: return "SingularScatterMatrix";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoConvergence:
    case ErrorCode::DivergedLoss:
    case ErrorCode::NonFiniteCurvature:
    case ErrorCode::SingularScatterMatrix:
      return true;
    default:
      return false;
  }
}

}  // namespace covhess
