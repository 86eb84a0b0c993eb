#include "cartan_sync/measurement_graph.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include "cartan_sync/error.hpp"

namespace cartan_sync {
namespace {

int FindRoot(std::vector<int>& parent, int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

}  // namespace

MeasurementGraph::MeasurementGraph(GroupSpec group, int n, std::vector<Edge> edges)
    : group_(group), n_(n), edges_(std::move(edges)) {
  if (n_ < 1) throw Error(ErrorCode::kInvalidArgument, "graph needs at least one vertex");
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.i < 0 || e.j >= n_ || e.i >= e.j) {
      throw Error(ErrorCode::kInvalidArgument,
                  "edge (" + std::to_string(e.i + 1) + ", " + std::to_string(e.j + 1) +
                      ") violates 1 <= i < j <= n");
    }
    if (!seen.emplace(e.i, e.j).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate edge (" + std::to_string(e.i + 1) +
                                                   ", " + std::to_string(e.j + 1) + ")");
    }
    if (!(e.w >= 0.0) || !std::isfinite(e.w)) {
      throw Error(ErrorCode::kInvalidArgument, "edge weights must be finite and nonnegative");
    }
    CheckElement(group_, e.g);
  }
  if (!IsConnected(n_, edges_)) {
    throw Error(ErrorCode::kGraphDisconnected, "measurement graph is not connected");
  }
}

std::vector<double> MeasurementGraph::Degrees() const {
  std::vector<double> deg(n_, 0.0);
  for (const Edge& e : edges_) {
    deg[e.i] += e.w;
    deg[e.j] += e.w;
  }
  return deg;
}

bool IsConnected(int n, const std::vector<Edge>& edges) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  int components = n;
  for (const Edge& e : edges) {
    if (e.w <= 0.0) continue;
    const int a = FindRoot(parent, e.i);
    const int b = FindRoot(parent, e.j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

MeasurementGraph RotationPartGraph(const MeasurementGraph& graph, bool eta_part) {
  const GroupSpec& spec = graph.group();
  std::vector<Edge> out;
  out.reserve(graph.edges().size());
  GroupSpec target;
  switch (spec.kind) {
    case GroupKind::kSE:
      target = GroupSpec::SO(spec.d);
      for (const Edge& e : graph.edges()) {
        out.push_back({e.i, e.j, e.w, std::get<RigidMotion>(e.g).mu});
      }
      break;
    case GroupKind::kMMG:
      target = GroupSpec::O(eta_part ? spec.l : spec.d);
      for (const Edge& e : graph.edges()) {
        const auto& m = std::get<MMGElement>(e.g);
        out.push_back({e.i, e.j, e.w, eta_part ? m.eta : m.mu});
      }
      break;
    default:
      return graph;
  }
  return {target, graph.n(), std::move(out)};
}

}  // namespace cartan_sync
