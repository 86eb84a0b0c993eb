#pragma once

#include <vector>

#include "cartan_sync/measurement_graph.hpp"

namespace cartan_sync {

struct SpectralResult {
  std::vector<Rotation> rotations;
  // Gap between the k-th and (k+1)-th eigenvalues of the normalized matrix.
  double eigengap = 0.0;
};

/// Eigenvector method for synchronization over SO(k) or O(k). Estimates are
/// gauge-fixed so that the first one is the identity.
SpectralResult SpectralSyncDetailed(const MeasurementGraph& graph);

std::vector<Rotation> SpectralSyncCompact(const MeasurementGraph& graph);

}  // namespace cartan_sync
