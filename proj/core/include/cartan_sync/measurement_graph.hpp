#pragma once

#include <vector>

#include "cartan_sync/group.hpp"

namespace cartan_sync {

/// One measurement g_ij ~ g_i g_j^{-1}. Vertices are 0-based and i < j.
struct Edge {
  int i = 0;
  int j = 0;
  double w = 1.0;
  GroupElement g;
};

/// Weighted measurement graph over a single group. Construction validates
/// indices, duplicates, element dimensions and connectivity (edges with
/// w = 0 do not count towards connectivity).
class MeasurementGraph {
 public:
  MeasurementGraph(GroupSpec group, int n, std::vector<Edge> edges);

  const GroupSpec& group() const { return group_; }
  int n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Weighted degree of every vertex.
  std::vector<double> Degrees() const;

 private:
  GroupSpec group_;
  int n_;
  std::vector<Edge> edges_;
};

/// True when the positive-weight edges connect all n vertices.
bool IsConnected(int n, const std::vector<Edge>& edges);

/// The graph of compact parts: rotation blocks for SE, and for MMG either the
/// O(d) (`eta_part` false) or the O(l) part.
MeasurementGraph RotationPartGraph(const MeasurementGraph& graph, bool eta_part = false);

}  // namespace cartan_sync
