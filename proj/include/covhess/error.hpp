#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace covhess {

enum class ErrorCode {
  // Shape and argument validation.
  DimensionMismatch,
  NonSquare,
  NotSymmetric,
  LengthMismatch,
  IndexOutOfRange,
  InvalidArgument,
  // Data handling.
  ParseError,
  NonBinaryLabel,
  EmptyDataset,
  TooFewSamples,
  TooFewClassMembers,
  ZeroVarianceColumn,
  SingleClass,
  FoldMismatch,
  MissingModel,
  MissingColumn,
  IoError,
  // Identity checks.
  ZeroOverallVariance,
  DegenerateProjection,
  ZeroMeanDifference,
  NonPositiveLeadingEigenvalue,
  // Numerical failures.
  NoConvergence,
  DivergedLoss,
  NonFiniteCurvature,
  SingularScatterMatrix,
};

std::string_view to_string(ErrorCode code);

// True for failures of a numerical procedure rather than of its inputs.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace covhess
