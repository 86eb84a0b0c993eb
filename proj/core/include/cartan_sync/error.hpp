#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cartan_sync {

// Every failure surfaced by the library carries one of these codes. The
// token returned by ErrorName() is what the CLI prints.
enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kAngleAtPi,
  kRankDeficient,
  kBoundaryOfInjectivity,
  kNoConvergence,
  kNotInImage,
  kRadiusViolated,
  kGraphDisconnected,
  kEigSolverFailure,
  kLambdaTooSmall,
  kDegenerateNullSpace,
  kConnectivityFailure,
  kAllNoiseFree,
  kUnsupportedDensity,
  kConfigInvalid,
  kIOError,
};

std::string_view ErrorName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return ErrorName(code_); }

 private:
  ErrorCode code_;
};

}  // namespace cartan_sync
