#include "hitrun/errors.hpp"

namespace hitrun {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::NonSymmetric: return "NonSymmetric";
  case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
  case ErrorCode::DimensionZero: return "DimensionZero";
  case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  case ErrorCode::EmptySupport: return "EmptySupport";
  case ErrorCode::ZeroVector: return "ZeroVector";
  case ErrorCode::UnsupportedEstimator: return "UnsupportedEstimator";
  case ErrorCode::UnsupportedLaw: return "UnsupportedLaw";
  case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
  case ErrorCode::CoincidentPoints: return "CoincidentPoints";
  case ErrorCode::ZeroDirection: return "ZeroDirection";
  case ErrorCode::InsufficientReplicas: return "InsufficientReplicas";
  case ErrorCode::BadKappa: return "BadKappa";
  case ErrorCode::BadDimensions: return "BadDimensions";
  case ErrorCode::BadEpsilon: return "BadEpsilon";
  case ErrorCode::BadInputs: return "BadInputs";
  case ErrorCode::BadA: return "BadA";
  case ErrorCode::RankDeficient: return "RankDeficient";
  case ErrorCode::Inconsistent: return "Inconsistent";
  case ErrorCode::DegenerateDirection: return "DegenerateDirection";
  case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  case ErrorCode::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::ZeroVector:
  case ErrorCode::ZeroDirection:
  case ErrorCode::DegenerateDirection:
  case ErrorCode::NumericalFailure:
    return false;
  default:
    return true;
  }
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

void fail(ErrorCode code, const std::string &message) {
  throw Error(code, message);
}

} // namespace hitrun
