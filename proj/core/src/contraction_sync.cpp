#include "cartan_sync/sync.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "cartan_sync/error.hpp"
#include "cartan_sync/spectral.hpp"

namespace cartan_sync {
namespace {

constexpr std::size_t kBootstrapEdges = 2000;
constexpr std::size_t kMaxTriangles = 5000;
constexpr double kSnrCap = 64.0;

struct Registry {
  std::mutex mutex;
  std::map<std::string, CompactSolverFn> solvers{{"spectral", SpectralSyncCompact}};
};

Registry& GetRegistry() {
  static Registry registry;
  return registry;
}

double ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

double Median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  if (xs.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(xs.begin(), mid));
}

double MaxLinearNorm(const MeasurementGraph& graph) {
  double m = 0.0;
  for (const Edge& e : graph.edges()) {
    if (e.w > 0.0) m = std::max(m, LinearPartNorm(e.g));
  }
  return m;
}

int AlignmentDim(const GroupSpec& spec) { return spec.kind == GroupKind::kMMG ? spec.d * spec.l : spec.d; }

Matrix ExpP(const GroupSpec& spec, const Matrix& v) {
  if (spec.kind == GroupKind::kSE) return RodriguesExp(TangentP::SE(v.col(0))).matrix();
  return MatExp(SkewEmbed(TangentP::MMG(v)));
}

GroupSpec CompactSpec(const GroupSpec& spec) {
  if (spec.kind == GroupKind::kSE) return GroupSpec::SO(spec.d + 1);
  return GroupSpec::O(spec.d + spec.l);
}

void RequireMotionGroup(const GroupSpec& spec) {
  if (spec.kind != GroupKind::kSE && spec.kind != GroupKind::kMMG) {
    throw Error(ErrorCode::kInvalidArgument, "contraction needs a graph over SE(d) or MMG(d, l)");
  }
}

void ValidateLambda(const MeasurementGraph& graph, double lambda, MapKind map) {
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kLambdaTooSmall, "lambda must be finite and >= 1");
  }
  if (map == MapKind::kPhi) {
    if (graph.group().kind != GroupKind::kSE) {
      throw Error(ErrorCode::kInvalidArgument, "the polar projection map is defined for SE(d) only");
    }
    return;
  }
  const double max_v = MaxLinearNorm(graph);
  if (max_v / lambda >= std::numbers::pi) {
    throw Error(ErrorCode::kLambdaTooSmall, "max ||v|| / lambda leaves the injectivity domain");
  }
  if (2.0 * max_v > kHomomorphismRadius * lambda * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kLambdaTooSmall,
                "lambda = " + std::to_string(lambda) + " is below (2 / 0.59) * max ||v|| = " +
                    std::to_string(2.0 * max_v / kHomomorphismRadius));
  }
}

// Back mapping of compact estimates, with per-vertex warm starts for the
// optimization-based decomposition.
class BackMapper {
 public:
  BackMapper(const std::vector<Rotation>& compact, const GroupSpec& group, double lambda, MapKind map)
      : compact_(compact), group_(group), lambda_(lambda), map_(map), warm_(compact.size()) {}

  GroupElement MapOne(int i, const Matrix& exp_v) {
    const Matrix q = compact_[i].matrix() * exp_v;
    const bool special = group_.kind == GroupKind::kSE;
    Rotation rot(q, special);
    if (map_ == MapKind::kPhi) return PhiInverse(CompactImage(std::move(rot), lambda_, group_));
    if (group_.kind == GroupKind::kSE) {
      CartanFactors f = CartanDecomposeSO(rot);
      return RigidMotion(std::move(f.k), lambda_ * f.p.value.col(0));
    }
    CartanOptOptions opts;
    opts.initial = warm_[i];
    const CartanFactors f = CartanDecomposeOpt(rot, group_.d, group_.l, opts);
    warm_[i] = f.p.value;
    const Matrix& k = f.k.matrix();
    return MMGElement(Rotation(k.topLeftCorner(group_.d, group_.d), false),
                      Rotation(k.bottomRightCorner(group_.l, group_.l), false), lambda_ * f.p.value);
  }

  std::vector<GroupElement> MapAll(const Matrix& v) {
    const Matrix e = ExpP(group_, v);
    std::vector<GroupElement> out;
    out.reserve(compact_.size());
    for (int i = 0; i < static_cast<int>(compact_.size()); ++i) out.push_back(MapOne(i, e));
    return out;
  }

 private:
  const std::vector<Rotation>& compact_;
  GroupSpec group_;
  double lambda_;
  MapKind map_;
  std::vector<std::optional<Matrix>> warm_;
};

std::pair<double, SyncSolution> ChooseLambdaImpl(const MeasurementGraph& graph, int budget,
                                                 const ContractionOptions& options) {
  if (budget < 1) throw Error(ErrorCode::kInvalidArgument, "lambda budget must be at least 1");
  const std::vector<double> grid = LambdaGrid(LambdaSearchInterval(graph), budget);
  std::optional<std::pair<double, SyncSolution>> best;
  std::optional<Error> last_error;
  for (double lambda : grid) {
    ContractionOptions fixed = options;
    fixed.lambda = lambda;
    try {
      SyncSolution s = ContractionSync(graph, fixed);
      if (!best || s.diagnostics.residual < best->second.diagnostics.residual) {
        best.emplace(lambda, std::move(s));
      }
    } catch (const Error& err) {
      last_error = err;
    }
  }
  if (!best) throw *last_error;
  return std::move(*best);
}

}  // namespace

double MeasurementObjective(const MeasurementGraph& graph, const std::vector<GroupElement>& estimates) {
  if (static_cast<int>(estimates.size()) != graph.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "estimate count differs from the vertex count");
  }
  double total = 0.0;
  for (const Edge& e : graph.edges()) {
    if (e.w == 0.0) continue;
    const double dist = HybridDistance(Compose(estimates[e.i], Inverse(estimates[e.j])), e.g);
    total += e.w * dist * dist;
  }
  return total;
}

void FixGauge(std::vector<GroupElement>& estimates) {
  if (estimates.empty()) return;
  const GroupElement anchor = Inverse(estimates.front());
  for (GroupElement& g : estimates) g = Compose(g, anchor);
}

void RegisterCompactSolver(const std::string& name, CompactSolverFn fn) {
  if (name.empty() || !fn) throw Error(ErrorCode::kInvalidArgument, "solver needs a name and a callable");
  Registry& reg = GetRegistry();
  std::lock_guard lock(reg.mutex);
  reg.solvers[name] = std::move(fn);
}

CompactSolverChoice LookupCompactSolver(const std::string& name) {
  if (name == "spectral") return CompactSolverChoice::Spectral();
  Registry& reg = GetRegistry();
  std::lock_guard lock(reg.mutex);
  const auto it = reg.solvers.find(name);
  if (it == reg.solvers.end()) throw Error(ErrorCode::kConfigInvalid, "unknown compact solver '" + name + "'");
  return {name, it->second};
}

std::vector<std::string> RegisteredCompactSolvers() {
  Registry& reg = GetRegistry();
  std::lock_guard lock(reg.mutex);
  std::vector<std::string> names;
  for (const auto& [name, fn] : reg.solvers) names.push_back(name);
  return names;
}

std::vector<Rotation> SolveCompact(const CompactSolverChoice& choice, const MeasurementGraph& graph,
                                   std::optional<double>* eigengap) {
  if (!choice.plugin) {
    SpectralResult r = SpectralSyncDetailed(graph);
    if (eigengap != nullptr) *eigengap = r.eigengap;
    return std::move(r.rotations);
  }
  std::vector<Rotation> out = choice.plugin(graph);
  const GroupSpec& spec = graph.group();
  if (static_cast<int>(out.size()) != graph.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "solver '" + choice.name + "' returned the wrong count");
  }
  for (const Rotation& r : out) {
    if (r.dim() != spec.d) {
      throw Error(ErrorCode::kDimensionMismatch, "solver '" + choice.name + "' returned the wrong order");
    }
    if (spec.kind == GroupKind::kSO && r.matrix().determinant() <= 0.0) {
      throw Error(ErrorCode::kDimensionMismatch, "solver '" + choice.name + "' left SO(k)");
    }
  }
  if (eigengap != nullptr) eigengap->reset();
  return out;
}

LambdaInterval LambdaSearchInterval(const MeasurementGraph& graph) {
  RequireMotionGroup(graph.group());
  LambdaInterval out;
  const double max_v = MaxLinearNorm(graph);
  if (max_v == 0.0) return out;

  std::vector<double> norms;
  std::vector<std::vector<int>> adj(graph.n());
  std::map<std::pair<int, int>, const Edge*> by_pair;
  for (const Edge& e : graph.edges()) {
    if (e.w <= 0.0) continue;
    norms.push_back(LinearPartNorm(e.g));
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
    by_pair[{e.i, e.j}] = &e;
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  // Translation noise is estimated from cycle residuals g_ab g_bc g_ac^{-1}
  // over triangles, signal from the median translation norm.
  std::vector<double> cycle;
  for (const auto& [key, e] : by_pair) {
    if (cycle.size() >= kMaxTriangles) break;
    const auto [a, b] = key;
    for (int c : adj[b]) {
      if (c <= b || !std::binary_search(adj[a].begin(), adj[a].end(), c)) continue;
      const GroupElement loop =
          Compose(Compose(e->g, by_pair.at({b, c})->g), Inverse(by_pair.at({a, c})->g));
      cycle.push_back(LinearPartNorm(loop));
      if (cycle.size() >= kMaxTriangles) break;
    }
  }
  double snr = 4.0;
  if (!cycle.empty()) {
    const double noise = Median(cycle) / std::sqrt(3.0);
    snr = noise > 0.0 ? Median(norms) / noise : kSnrCap;
  }
  out.snr_estimate = std::clamp(snr, 1.0, kSnrCap);
  out.lower = std::max(1.0, 2.0 / kHomomorphismRadius * max_v);
  out.upper = out.lower * std::max(4.0, out.snr_estimate);
  return out;
}

std::vector<double> LambdaGrid(const LambdaInterval& interval, int budget) {
  if (budget < 1) throw Error(ErrorCode::kInvalidArgument, "lambda budget must be at least 1");
  if (budget == 1 || interval.upper <= interval.lower) {
    return {std::sqrt(interval.lower * interval.upper)};
  }
  std::vector<double> grid;
  const double ratio = interval.upper / interval.lower;
  for (int t = 0; t < budget; ++t) {
    grid.push_back(interval.lower * std::pow(ratio, static_cast<double>(t) / (budget - 1)));
  }
  return grid;
}

double ChooseLambda(const MeasurementGraph& graph, int budget, const ContractionOptions& options) {
  RequireMotionGroup(graph.group());
  if (MaxLinearNorm(graph) == 0.0) return 1.0;
  return ChooseLambdaImpl(graph, budget, options).first;
}

std::vector<GroupElement> BackMapEstimates(const std::vector<Rotation>& compact, const GroupSpec& group,
                                           double lambda, const Matrix& v, MapKind map) {
  BackMapper mapper(compact, group, lambda, map);
  return mapper.MapAll(v);
}

AlignmentResult OptimizeGlobalAlignment(const std::vector<Rotation>& compact, const MeasurementGraph& graph,
                                        double lambda, int budget, MapKind map) {
  const GroupSpec& spec = graph.group();
  RequireMotionGroup(spec);
  const int rows = spec.d;
  const int cols = spec.kind == GroupKind::kMMG ? spec.l : 1;
  AlignmentResult out{Matrix::Zero(rows, cols), 0.0, 0.0, 0};
  if (budget <= 0) return out;

  std::vector<const Edge*> edges;
  for (const Edge& e : graph.edges()) {
    if (e.w > 0.0) edges.push_back(&e);
  }
  if (edges.size() > kBootstrapEdges) {
    std::vector<const Edge*> sample;
    std::mt19937_64 rng(0x5DEECE66DULL);
    std::sample(edges.begin(), edges.end(), std::back_inserter(sample), kBootstrapEdges, rng);
    edges = std::move(sample);
  }
  std::vector<int> vertices;
  {
    std::vector<char> used(graph.n(), 0);
    for (const Edge* e : edges) used[e->i] = used[e->j] = 1;
    for (int i = 0; i < graph.n(); ++i) {
      if (used[i]) vertices.push_back(i);
    }
  }

  BackMapper mapper(compact, spec, lambda, map);
  std::vector<std::optional<GroupElement>> est(graph.n());
  auto objective = [&](const Matrix& v) -> double {
    ++out.evaluations;
    try {
      const Matrix e = ExpP(spec, v);
      for (int i : vertices) est[i] = mapper.MapOne(i, e);
      double total = 0.0;
      for (const Edge* edge : edges) {
        total += edge->w * HybridDistance(Compose(*est[edge->i], Inverse(*est[edge->j])), edge->g);
      }
      return total;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  double best = objective(out.v);
  out.objective_at_zero = best;
  out.objective = best;
  if (!std::isfinite(best)) return out;

  std::vector<double> p_norms;
  for (int i : vertices) p_norms.push_back(LinearPartNorm(*est[i]) / lambda);
  double step = 0.25 * Median(p_norms);
  if (!(step > 0.0)) step = 1e-3;
  const double min_step = 1e-12 * std::max(1.0, step);

  Matrix v = out.v;
  while (out.evaluations < budget && step > min_step) {
    bool improved = false;
    for (int c = 0; c < rows * cols && out.evaluations < budget; ++c) {
      for (double sign : {1.0, -1.0}) {
        if (out.evaluations >= budget) break;
        Matrix trial = v;
        trial(c % rows, c / rows) += sign * step;
        const double f = objective(trial);
        if (f < best) {
          best = f;
          v = std::move(trial);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  out.v = v;
  out.objective = best;
  return out;
}

SyncSolution ContractionSync(const MeasurementGraph& graph, const ContractionOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const GroupSpec& spec = graph.group();
  RequireMotionGroup(spec);
  const std::string name = options.map == MapKind::kPsi ? "contraction-spectral" : "contraction-pd";

  if (!options.lambda) {
    if (MaxLinearNorm(graph) == 0.0) {
      ContractionOptions fixed = options;
      fixed.lambda = 1.0;
      SyncSolution s = ContractionSync(graph, fixed);
      s.diagnostics.runtime_ms = ElapsedMs(start);
      return s;
    }
    SyncSolution s = ChooseLambdaImpl(graph, options.lambda_budget, options).second;
    s.diagnostics.runtime_ms = ElapsedMs(start);
    return s;
  }
  const double lambda = *options.lambda;
  ValidateLambda(graph, lambda, options.map);

  std::vector<Edge> compact_edges;
  compact_edges.reserve(graph.edges().size());
  for (const Edge& e : graph.edges()) {
    compact_edges.push_back({e.i, e.j, e.w, ForwardMap(e.g, lambda, options.map).Q});
  }
  const MeasurementGraph compact_graph(CompactSpec(spec), graph.n(), std::move(compact_edges));

  SyncSolution out;
  out.group = spec;
  out.lambda_used = lambda;
  out.diagnostics.solver = name;
  const std::vector<Rotation> compact = SolveCompact(options.solver, compact_graph, &out.diagnostics.eigengap);

  const int budget = options.align_budget < 0 ? 50 * AlignmentDim(spec) : options.align_budget;
  const AlignmentResult align = OptimizeGlobalAlignment(compact, graph, lambda, budget, options.map);
  out.diagnostics.align_evaluations = align.evaluations;
  out.diagnostics.align_norm = align.v.norm();

  out.estimates = BackMapEstimates(compact, spec, lambda, align.v, options.map);
  FixGauge(out.estimates);
  out.diagnostics.residual = MeasurementObjective(graph, out.estimates);
  out.diagnostics.runtime_ms = ElapsedMs(start);
  return out;
}

}  // namespace cartan_sync
