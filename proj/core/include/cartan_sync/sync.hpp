#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cartan_sync/contraction.hpp"
#include "cartan_sync/measurement_graph.hpp"

namespace cartan_sync {

struct SyncDiagnostics {
  std::string solver;
  // sum_ij w_ij d_H(g_i g_j^{-1}, g_ij)^2 evaluated at the returned estimates.
  double residual = 0.0;
  double runtime_ms = 0.0;
  std::optional<double> eigengap;
  int align_evaluations = 0;
  double align_norm = 0.0;
};

struct SyncSolution {
  GroupSpec group;
  std::vector<GroupElement> estimates;
  std::optional<double> lambda_used;
  SyncDiagnostics diagnostics;
};

/// Least-squares objective over the measurements for a candidate solution.
double MeasurementObjective(const MeasurementGraph& graph, const std::vector<GroupElement>& estimates);

/// Right-multiplies every estimate by the inverse of the first one.
void FixGauge(std::vector<GroupElement>& estimates);

// ---- compact solvers -------------------------------------------------------

using CompactSolverFn = std::function<std::vector<Rotation>(const MeasurementGraph&)>;

/// Solver used on the compact side. An empty `plugin` selects the built-in
/// eigenvector method.
struct CompactSolverChoice {
  std::string name = "spectral";
  CompactSolverFn plugin;

  static CompactSolverChoice Spectral() { return {}; }
};

/// Process-wide registry used by the CLI to resolve `plugin:<name>`.
/// "spectral" is always registered.
void RegisterCompactSolver(const std::string& name, CompactSolverFn fn);
CompactSolverChoice LookupCompactSolver(const std::string& name);
std::vector<std::string> RegisteredCompactSolvers();

/// Runs the selected solver and validates its output. `eigengap` is filled
/// for the built-in method only.
std::vector<Rotation> SolveCompact(const CompactSolverChoice& choice, const MeasurementGraph& graph,
                                   std::optional<double>* eigengap = nullptr);

// ---- contraction pipeline --------------------------------------------------

struct ContractionOptions {
  std::optional<double> lambda;  // absent selects lambda automatically
  CompactSolverChoice solver;
  int align_budget = -1;         // negative: 50 * dim(p)
  int lambda_budget = 8;
  MapKind map = MapKind::kPsi;
};

SyncSolution ContractionSync(const MeasurementGraph& graph, const ContractionOptions& options = {});

struct LambdaInterval {
  double lower = 1.0;
  double upper = 1.0;
  double snr_estimate = 1.0;
};

/// Search interval for lambda derived from the measurements alone.
LambdaInterval LambdaSearchInterval(const MeasurementGraph& graph);

/// Candidate lambdas evaluated for a given budget (log-spaced over the interval).
std::vector<double> LambdaGrid(const LambdaInterval& interval, int budget);

/// Picks the lambda among LambdaGrid(...) with the smallest measurement
/// objective. `options.lambda` is ignored.
double ChooseLambda(const MeasurementGraph& graph, int budget, const ContractionOptions& options = {});

struct AlignmentResult {
  Matrix v;  // element of p in compact units (d x 1 or d x l)
  double objective = 0.0;
  double objective_at_zero = 0.0;
  int evaluations = 0;
};

/// Pattern search for a right alignment exp(v), v in p, of the compact
/// estimates. `budget` caps objective evaluations.
AlignmentResult OptimizeGlobalAlignment(const std::vector<Rotation>& compact, const MeasurementGraph& graph,
                                        double lambda, int budget, MapKind map = MapKind::kPsi);

/// Back-mapped estimates psi^{-1}(Q_i exp(v)).
std::vector<GroupElement> BackMapEstimates(const std::vector<Rotation>& compact, const GroupSpec& group,
                                           double lambda, const Matrix& v, MapKind map = MapKind::kPsi);

// ---- baselines -------------------------------------------------------------

/// Rotations first, then translations by linear least squares.
SyncSolution SeparationSync(const MeasurementGraph& graph,
                            const CompactSolverChoice& solver = CompactSolverChoice::Spectral());

enum class MmgResidualForm {
  kGroupLaw,  // B_i - mu_i mu_j^T B_j eta_j eta_i^T - B_ij, zero on clean data
  kPrinted,   // B_ij eta_j + mu_i mu_j^T B_j + B_i, kept for comparison only
};

SyncSolution SeparationSyncMMG(const MeasurementGraph& graph,
                               MmgResidualForm form = MmgResidualForm::kGroupLaw);

/// Null-space method on the homogeneous representation, translations scaled
/// by 1 / lambda_scale before the solve.
SyncSolution SeSpectralSync(const MeasurementGraph& graph, double lambda_scale = 1.0);

}  // namespace cartan_sync
