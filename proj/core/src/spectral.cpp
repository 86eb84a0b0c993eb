#include "cartan_sync/spectral.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "cartan_sync/error.hpp"

namespace cartan_sync {

SpectralResult SpectralSyncDetailed(const MeasurementGraph& graph) {
  const GroupSpec& spec = graph.group();
  if (spec.kind != GroupKind::kSO && spec.kind != GroupKind::kO) {
    throw Error(ErrorCode::kInvalidArgument, "spectral sync expects a graph over SO(k) or O(k)");
  }
  const bool special = spec.kind == GroupKind::kSO;
  const int k = spec.d;
  const int n = graph.n();
  const std::vector<double> deg = graph.Degrees();
  for (double x : deg) {
    if (!(x > 0.0)) throw Error(ErrorCode::kGraphDisconnected, "vertex with zero degree");
  }

  // Symmetrically normalized block matrix D^{-1/2} M D^{-1/2}; the diagonal
  // blocks stay zero so that clean data gives eigenvalue exactly one.
  Matrix h = Matrix::Zero(n * k, n * k);
  for (const Edge& e : graph.edges()) {
    if (e.w == 0.0) continue;
    const Matrix& r = std::get<Rotation>(e.g).matrix();
    const double s = e.w / std::sqrt(deg[e.i] * deg[e.j]);
    h.block(e.i * k, e.j * k, k, k) = s * r;
    h.block(e.j * k, e.i * k, k, k) = s * r.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigSolverFailure, "symmetric eigensolver did not converge");
  }
  const Vector& values = eig.eigenvalues();  // ascending
  const int top = n * k - k;
  Matrix u = eig.eigenvectors().rightCols(k);
  for (int i = 0; i < n; ++i) u.middleRows(i * k, k) /= std::sqrt(deg[i]);

  if (special) {
    int negative = 0;
    for (int i = 0; i < n; ++i) {
      if (u.middleRows(i * k, k).determinant() < 0.0) ++negative;
    }
    if (2 * negative > n) u.col(0) *= -1.0;
  }

  SpectralResult out;
  out.eigengap = top > 0 ? values(top) - values(top - 1) : values(top);
  out.rotations.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.rotations.push_back(ProjectToRotation(u.middleRows(i * k, k), special));
  }
  const Rotation anchor = out.rotations.front().Transpose();
  for (Rotation& r : out.rotations) r = r * anchor;
  return out;
}

std::vector<Rotation> SpectralSyncCompact(const MeasurementGraph& graph) {
  return SpectralSyncDetailed(graph).rotations;
}

}  // namespace cartan_sync
