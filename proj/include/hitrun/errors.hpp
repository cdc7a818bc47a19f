#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hitrun {

enum class ErrorCode {
  NonSymmetric,
  NotPositiveDefinite,
  DimensionZero,
  DimensionMismatch,
  EmptySupport,
  ZeroVector,
  UnsupportedEstimator,
  UnsupportedLaw,
  UnsupportedDimension,
  CoincidentPoints,
  ZeroDirection,
  InsufficientReplicas,
  BadKappa,
  BadDimensions,
  BadEpsilon,
  BadInputs,
  BadA,
  RankDeficient,
  Inconsistent,
  DegenerateDirection,
  ConfigInvalid,
  NumericalFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

// Errors caused by the caller's inputs map to CLI exit code 2; the rest are
// numerical failures (exit code 3).
bool is_input_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message);

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string &message);

} // namespace hitrun
