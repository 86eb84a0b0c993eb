#include <chrono>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SVD>

#include "cartan_sync/error.hpp"
#include "cartan_sync/sync.hpp"

namespace cartan_sync {
namespace {

double ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// One term w * ||X_i - K X_j - y||^2 of a block least-squares problem over
// vectorized unknowns X_1..X_n.
struct BlockTerm {
  int i;
  int j;
  double w;
  Matrix k;
  Vector y;
};

// Solves the normal equations. With `pin_first` the first block is fixed at
// zero (removes the gauge null space); otherwise the minimum-norm solution
// is returned.
std::vector<Vector> SolveBlockLeastSquares(int n, int m, const std::vector<BlockTerm>& terms, bool pin_first) {
  const int offset = pin_first ? 1 : 0;
  const int size = (n - offset) * m;
  std::vector<Vector> out(n, Vector::Zero(m));
  if (size == 0) return out;

  std::vector<Eigen::Triplet<double>> trip;
  Vector rhs = Vector::Zero(size);
  auto add_block = [&](int bi, int bj, const Matrix& block) {
    if (bi < offset || bj < offset) return;
    const int r0 = (bi - offset) * m;
    const int c0 = (bj - offset) * m;
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        if (block(r, c) != 0.0) trip.emplace_back(r0 + r, c0 + c, block(r, c));
      }
    }
  };
  auto add_rhs = [&](int b, const Vector& v) {
    if (b >= offset) rhs.segment((b - offset) * m, m) += v;
  };
  const Matrix eye = Matrix::Identity(m, m);
  for (const BlockTerm& t : terms) {
    add_block(t.i, t.i, t.w * eye);
    add_block(t.j, t.j, t.w * t.k.transpose() * t.k);
    add_block(t.i, t.j, -t.w * t.k);
    add_block(t.j, t.i, -t.w * t.k.transpose());
    add_rhs(t.i, t.w * t.y);
    add_rhs(t.j, -t.w * t.k.transpose() * t.y);
  }
  Eigen::SparseMatrix<double> h(size, size);
  h.setFromTriplets(trip.begin(), trip.end());

  Vector x;
  if (pin_first) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(h);
    if (ldlt.info() != Eigen::Success) {
      throw Error(ErrorCode::kGraphDisconnected, "translation system is singular");
    }
    x = ldlt.solve(rhs);
  } else {
    x = Matrix(h).completeOrthogonalDecomposition().solve(rhs);
  }
  for (int b = offset; b < n; ++b) out[b] = x.segment((b - offset) * m, m);
  return out;
}

// vec(A X C) = (C^T kron A) vec(X), column-major vectorization.
Matrix SandwichOperator(const Matrix& a, const Matrix& c) {
  const auto ar = a.rows();
  const auto ac = a.cols();
  Matrix out(ar * c.cols(), ac * c.rows());
  for (Eigen::Index p = 0; p < c.cols(); ++p) {
    for (Eigen::Index q = 0; q < c.rows(); ++q) out.block(p * ar, q * ac, ar, ac) = c(q, p) * a;
  }
  return out;
}

Vector Vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix Unvec(const Vector& v, int rows, int cols) { return Eigen::Map<const Matrix>(v.data(), rows, cols); }

std::vector<Rotation> AnchoredRotations(const CompactSolverChoice& solver, const MeasurementGraph& graph,
                                        std::optional<double>* eigengap) {
  std::vector<Rotation> r = SolveCompact(solver, graph, eigengap);
  const Rotation anchor = r.front().Transpose();
  for (Rotation& x : r) x = x * anchor;
  return r;
}

}  // namespace

SyncSolution SeparationSync(const MeasurementGraph& graph, const CompactSolverChoice& solver) {
  const auto start = std::chrono::steady_clock::now();
  const GroupSpec& spec = graph.group();
  if (spec.kind != GroupKind::kSE) throw Error(ErrorCode::kInvalidArgument, "separation expects SE(d)");
  const int d = spec.d;

  SyncSolution out;
  out.group = spec;
  out.diagnostics.solver = "separation";
  const std::vector<Rotation> mu = AnchoredRotations(solver, RotationPartGraph(graph), &out.diagnostics.eigengap);

  std::vector<BlockTerm> terms;
  for (const Edge& e : graph.edges()) {
    if (e.w == 0.0) continue;
    const auto& g = std::get<RigidMotion>(e.g);
    terms.push_back({e.i, e.j, e.w, mu[e.i].matrix() * mu[e.j].matrix().transpose(), g.b});
  }
  const std::vector<Vector> b = SolveBlockLeastSquares(graph.n(), d, terms, true);

  out.estimates.reserve(graph.n());
  for (int i = 0; i < graph.n(); ++i) out.estimates.push_back(RigidMotion(mu[i], b[i]));
  out.diagnostics.residual = MeasurementObjective(graph, out.estimates);
  out.diagnostics.runtime_ms = ElapsedMs(start);
  return out;
}

SyncSolution SeparationSyncMMG(const MeasurementGraph& graph, MmgResidualForm form) {
  const auto start = std::chrono::steady_clock::now();
  const GroupSpec& spec = graph.group();
  if (spec.kind != GroupKind::kMMG) throw Error(ErrorCode::kInvalidArgument, "separation-mmg expects MMG(d, l)");
  const int d = spec.d;
  const int l = spec.l;

  SyncSolution out;
  out.group = spec;
  out.diagnostics.solver = "separation-mmg";
  const CompactSolverChoice spectral = CompactSolverChoice::Spectral();
  const std::vector<Rotation> mu = AnchoredRotations(spectral, RotationPartGraph(graph, false), &out.diagnostics.eigengap);
  const std::vector<Rotation> eta = AnchoredRotations(spectral, RotationPartGraph(graph, true), nullptr);

  std::vector<BlockTerm> terms;
  for (const Edge& e : graph.edges()) {
    if (e.w == 0.0) continue;
    const auto& g = std::get<MMGElement>(e.g);
    const Matrix a = mu[e.i].matrix() * mu[e.j].matrix().transpose();
    if (form == MmgResidualForm::kGroupLaw) {
      const Matrix c = eta[e.j].matrix() * eta[e.i].matrix().transpose();
      terms.push_back({e.i, e.j, e.w, SandwichOperator(a, c), Vec(g.B)});
    } else {
      const Matrix k = -SandwichOperator(a, Matrix::Identity(l, l));
      terms.push_back({e.i, e.j, e.w, k, Vec(-(g.B * eta[e.j].matrix()))});
    }
  }
  const bool pin = form == MmgResidualForm::kGroupLaw;
  const std::vector<Vector> bs = SolveBlockLeastSquares(graph.n(), d * l, terms, pin);

  out.estimates.reserve(graph.n());
  for (int i = 0; i < graph.n(); ++i) out.estimates.push_back(MMGElement(mu[i], eta[i], Unvec(bs[i], d, l)));
  if (!pin) FixGauge(out.estimates);
  out.diagnostics.residual = MeasurementObjective(graph, out.estimates);
  out.diagnostics.runtime_ms = ElapsedMs(start);
  return out;
}

SyncSolution SeSpectralSync(const MeasurementGraph& graph, double lambda_scale) {
  const auto start = std::chrono::steady_clock::now();
  const GroupSpec& spec = graph.group();
  if (spec.kind != GroupKind::kSE) throw Error(ErrorCode::kInvalidArgument, "se-spectral expects SE(d)");
  if (!(lambda_scale > 0.0) || !std::isfinite(lambda_scale)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda_scale must be positive");
  }
  const int d = spec.d;
  const int k = d + 1;
  const int n = graph.n();
  const std::vector<double> deg = graph.Degrees();

  Matrix lap = Matrix::Zero(n * k, n * k);
  for (int i = 0; i < n; ++i) lap.block(i * k, i * k, k, k).diagonal().setConstant(deg[i]);
  for (const Edge& e : graph.edges()) {
    if (e.w == 0.0) continue;
    const auto& g = std::get<RigidMotion>(e.g);
    const RigidMotion scaled(g.mu, g.b / lambda_scale);
    lap.block(e.i * k, e.j * k, k, k) -= e.w * scaled.Homogeneous();
    lap.block(e.j * k, e.i * k, k, k) -= e.w * Inverse(scaled).Homogeneous();
  }

  Eigen::BDCSVD<Matrix> svd(lap, Eigen::ComputeThinV);
  const Matrix null_basis = svd.matrixV().rightCols(k);

  // Mixing T = [N, t]: N spans the directions orthogonal to the consensus
  // last row, t maps every block's last row to e_{d+1} in least squares.
  Matrix last_rows(n, k);
  for (int i = 0; i < n; ++i) last_rows.row(i) = null_basis.row(i * k + d);
  Eigen::JacobiSVD<Matrix> rsvd(last_rows, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = rsvd.singularValues();
  if (!(sv(0) > 1e-12)) throw Error(ErrorCode::kDegenerateNullSpace, "null space has no homogeneous row");
  Matrix t(k, k);
  t.leftCols(d) = rsvd.matrixV().rightCols(d);
  t.col(d) = rsvd.solve(Vector::Ones(n));
  if (std::abs(t.determinant()) < 1e-12 * t.col(d).norm()) {
    throw Error(ErrorCode::kDegenerateNullSpace, "mixing matrix is singular");
  }

  Matrix blocks = null_basis * t;
  int negative = 0;
  for (int i = 0; i < n; ++i) {
    if (blocks.block(i * k, 0, d, d).determinant() < 0.0) ++negative;
  }
  if (2 * negative > n) blocks.col(0) *= -1.0;

  SyncSolution out;
  out.group = spec;
  out.lambda_used = lambda_scale;
  out.diagnostics.solver = "se-spectral";
  const Vector& s = svd.singularValues();
  out.diagnostics.eigengap = s(n * k - k - 1) - s(n * k - k);
  out.estimates.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.estimates.push_back(RigidMotion(ProjectToRotation(blocks.block(i * k, 0, d, d), true),
                                        lambda_scale * blocks.block(i * k, d, d, 1)));
  }
  FixGauge(out.estimates);
  out.diagnostics.residual = MeasurementObjective(graph, out.estimates);
  out.diagnostics.runtime_ms = ElapsedMs(start);
  return out;
}

}  // namespace cartan_sync
