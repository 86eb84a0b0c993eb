#include "cartan_sync/error.hpp"

namespace cartan_sync {

std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kAngleAtPi: return "AngleAtPi";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kBoundaryOfInjectivity: return "BoundaryOfInjectivity";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kNotInImage: return "NotInImage";
    case ErrorCode::kRadiusViolated: return "RadiusViolated";
    case ErrorCode::kGraphDisconnected: return "GraphDisconnected";
    case ErrorCode::kEigSolverFailure: return "EigSolverFailure";
    case ErrorCode::kLambdaTooSmall: return "LambdaTooSmall";
    case ErrorCode::kDegenerateNullSpace: return "DegenerateNullSpace";
    case ErrorCode::kConnectivityFailure: return "ConnectivityFailure";
    case ErrorCode::kAllNoiseFree: return "AllNoiseFree";
    case ErrorCode::kUnsupportedDensity: return "UnsupportedDensity";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kIOError: return "IOError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorName(code)) + ": " + message), code_(code) {}

}  // namespace cartan_sync
