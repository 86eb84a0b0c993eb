#include "cartan_sync_cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <mutex>
#include <thread>

#include "cartan_sync/harness.hpp"
#include "cartan_sync/spectral_gap.hpp"
#include "cartan_sync_cli/io.hpp"

namespace cartan_sync::cli {
namespace {

namespace fs = std::filesystem;

void Report(const Error& e) { std::cerr << e.what() << "\n"; }

template <typename F>
int Guard(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    Report(e);
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << "\n";
    return kExitSolver;
  }
}

bool UsesLambda(const std::string& method) { return method != "separation" && method != "separation-mmg"; }

fs::path TruthPath(const ExperimentConfig& c, int trial) {
  return fs::path(c.output_path) / ("truth_t" + std::to_string(trial) + ".json");
}

fs::path GraphPath(const ExperimentConfig& c, int cell, int trial) {
  return fs::path(c.output_path) / ("graph_c" + std::to_string(cell) + "_t" + std::to_string(trial) + ".json");
}

ExperimentConfig LoadConfig(const std::string& path) {
  return ParseConfig(ReadFile(path));
}

struct Generated {
  GraphFile graph;
  NoiseSpec spec;
};

Generated GenerateCell(const ExperimentConfig& c, const Cell& cell, int trial, const std::vector<GroupElement>& truth) {
  NoiseSpec spec{cell.sigma_rot, cell.sigma_trans, cell.outlier_rate, cell.p, NoiseSeed(c.seed, cell.index, trial)};
  if (!spec.PlausiblyConnected(c.n)) {
    std::cerr << "warning: p = " << cell.p << " leaves fewer than n - 1 edges for n = " << c.n << "\n";
  }
  if (cell.snr_db) spec = CalibrateNoise(truth, c.group, spec, *cell.snr_db, c.sigma_ratio).spec;
  MeasurementSet set = MakeMeasurements(truth, c.group, spec);
  GraphMeta meta{cell.p, set.snr_db, cell.outlier_rate, trial, spec.seed};
  return {GraphFile{std::move(set.graph), meta}, spec};
}

double Elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// Runs `count` jobs on the pool; jobs are claimed in index order.
template <typename F>
void ParallelFor(int count, F&& job) {
  const int workers = std::max(1, std::min(WorkerCount(), count));
  std::atomic<int> next{0};
  auto loop = [&] {
    for (int k = next++; k < count; k = next++) job(k);
  };
  if (workers == 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (std::thread& t : pool) t.join();
}

TranslationDensity::Kind DensityKind(const std::string& name) {
  if (name == "gaussian") return TranslationDensity::Kind::kGaussian;
  if (name == "point") return TranslationDensity::Kind::kPointMass;
  if (name == "ball") return TranslationDensity::Kind::kUniformBall;
  throw Error(ErrorCode::kInvalidArgument, "unknown density '" + name + "' (gaussian, point, ball)");
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kIOError:
    case ErrorCode::kUnsupportedDensity:
      return kExitInput;
    default:
      return kExitSolver;
  }
}

SyncSolution RunMethod(const MeasurementGraph& graph, const SolveRequest& request) {
  CheckMethod(request.method, graph.group());
  const std::string& m = request.method;
  if (m == "separation") return SeparationSync(graph);
  if (m == "separation-mmg") return SeparationSyncMMG(graph);

  ContractionOptions options;
  options.lambda = request.lambda;
  options.align_budget = request.align_budget;
  options.lambda_budget = request.lambda_budget;
  if (m == "se-spectral") {
    const double scale = request.lambda ? *request.lambda : ChooseLambda(graph, request.lambda_budget, options);
    return SeSpectralSync(graph, scale);
  }
  if (m == "contraction-pd") options.map = MapKind::kPhi;
  if (m.rfind("plugin:", 0) == 0) options.solver = LookupCompactSolver(m.substr(7));
  return ContractionSync(graph, options);
}

int CmdGenerate(const std::string& config_path) {
  return Guard([&] {
    const ExperimentConfig c = LoadConfig(config_path);
    const std::vector<Cell> cells = ExpandCells(c);
    for (int t = 0; t < c.trials_per_cell; ++t) {
      const std::vector<GroupElement> truth = SampleGroundTruth(c.n, c.group, TruthSeed(c.seed, t));
      WriteFileAtomic(TruthPath(c, t), WriteTruth({c.group, truth}));
      for (const Cell& cell : cells) {
        WriteFileAtomic(GraphPath(c, cell.index, t), WriteGraph(GenerateCell(c, cell, t, truth).graph));
      }
    }
    return kExitOk;
  });
}

int CmdSolve(const std::string& graph_path, const SolveRequest& request, const std::string& out_path) {
  return Guard([&] {
    const GraphFile file = ParseGraph(ReadFile(graph_path));
    SolutionFile out{request.method, RunMethod(file.graph, request), file.meta};
    WriteFileAtomic(out_path, WriteSolution(out));
    return kExitOk;
  });
}

int CmdEval(const std::string& solution_path, const std::string& truth_path, const std::string& csv_path) {
  return Guard([&] {
    const SolutionFile sol = ParseSolution(ReadFile(solution_path));
    const TruthFile truth = ParseTruth(ReadFile(truth_path));
    if (!(sol.solution.group == truth.group) || sol.solution.estimates.size() != truth.elements.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "solution is " + sol.solution.group.ToString() + " with " +
                                                     std::to_string(sol.solution.estimates.size()) +
                                                     " elements, truth is " + truth.group.ToString() + " with " +
                                                     std::to_string(truth.elements.size()));
    }
    TrialRecord r;
    r.method = sol.method;
    r.group = truth.group;
    r.n = static_cast<int>(truth.elements.size());
    if (sol.meta) {
      r.p = sol.meta->p;
      r.snr_db = sol.meta->snr_db;
      r.outlier_rate = sol.meta->outlier_rate;
      r.trial = sol.meta->trial;
      r.seed = sol.meta->seed;
    } else {
      r.snr_db = std::numeric_limits<double>::quiet_NaN();
    }
    r.lambda = sol.solution.lambda_used.value_or(0.0);
    r.mse = Mse(sol.solution.estimates, truth.elements);
    r.runtime_ms = sol.solution.diagnostics.runtime_ms;
    AppendCsv(csv_path, {CsvRow(r)});
    std::printf("%.6g\n", r.mse);
    return kExitOk;
  });
}

int CmdSweep(const std::string& config_path) {
  return Guard([&] {
    const ExperimentConfig c = LoadConfig(config_path);
    if (c.methods.empty()) throw Error(ErrorCode::kConfigInvalid, "sweep needs at least one method");
    const std::vector<Cell> cells = ExpandCells(c);
    const int trials = c.trials_per_cell;
    const int units = static_cast<int>(cells.size()) * trials;
    const fs::path csv = fs::path(c.output_path) / "results.csv";

    std::vector<std::vector<GroupElement>> truths(trials);
    for (int t = 0; t < trials; ++t) {
      truths[t] = SampleGroundTruth(c.n, c.group, TruthSeed(c.seed, t));
      WriteFileAtomic(TruthPath(c, t), WriteTruth({c.group, truths[t]}));
    }

    std::mutex mu;
    std::vector<std::optional<std::vector<std::string>>> done(units);
    int flushed = 0;
    std::optional<Error> io_error;

    ParallelFor(units, [&](int unit) {
      const Cell& cell = cells[unit / trials];
      const int t = unit % trials;
      TrialRecord base;
      base.group = c.group;
      base.n = c.n;
      base.p = cell.p;
      base.outlier_rate = cell.outlier_rate;
      base.trial = t;
      base.seed = NoiseSeed(c.seed, cell.index, t);
      base.snr_db = cell.snr_db.value_or(std::numeric_limits<double>::quiet_NaN());

      std::optional<GraphFile> graph;
      std::string gen_error;
      try {
        graph = GenerateCell(c, cell, t, truths[t]).graph;
        base.snr_db = graph->meta->snr_db;
        WriteFileAtomic(GraphPath(c, cell.index, t), WriteGraph(*graph));
      } catch (const Error& e) {
        gen_error = std::string(e.name());
      }

      std::vector<std::string> rows;
      std::optional<double> auto_lambda;  // shared by contraction-spectral and se-spectral
      for (const std::string& method : c.methods) {
        const std::vector<std::optional<double>> lambdas =
            UsesLambda(method) ? c.lambda : std::vector<std::optional<double>>{std::nullopt};
        for (const std::optional<double>& lambda : lambdas) {
          TrialRecord r = base;
          r.method = method;
          r.lambda = lambda.value_or(0.0);
          if (!graph) {
            r.error = gen_error;
            rows.push_back(CsvRow(r));
            continue;
          }
          SolveRequest req{method, lambda, c.align_budget, c.lambda_budget};
          if (!lambda && method == "se-spectral" && auto_lambda) req.lambda = auto_lambda;
          const auto start = std::chrono::steady_clock::now();
          try {
            const SyncSolution s = RunMethod(graph->graph, req);
            r.runtime_ms = Elapsed(start);
            r.lambda = s.lambda_used.value_or(0.0);
            if (!lambda && (method == "contraction-spectral" || method == "se-spectral")) auto_lambda = s.lambda_used;
            r.mse = Mse(s.estimates, truths[t]);
          } catch (const Error& e) {
            r.runtime_ms = Elapsed(start);
            r.error = std::string(e.name());
          }
          rows.push_back(CsvRow(r));
        }
      }

      std::lock_guard<std::mutex> lock(mu);
      done[unit] = std::move(rows);
      if (io_error) return;
      try {
        while (flushed < units && done[flushed]) {
          AppendCsv(csv, *done[flushed]);
          done[flushed].reset();
          ++flushed;
        }
      } catch (const Error& e) {
        io_error = e;
      }
    });
    if (io_error) throw *io_error;
    std::cout << csv.string() << "\n";
    return kExitOk;
  });
}

int CmdGapcheck(int n, double sigma_rot, double sigma_trans, int samples, int d, const std::string& density,
                std::uint64_t seed) {
  return Guard([&] {
    TranslationDensity fv{DensityKind(density), sigma_trans};
    if (sigma_trans == 0.0) fv.kind = TranslationDensity::Kind::kPointMass;
    const SpectralGapReport r = SpectralGapCondition(fv, RotationDensity{d, sigma_rot}, n, samples, seed);
    const nlohmann::json out{{"n", n},
                             {"beta", r.beta},
                             {"gamma", r.gamma},
                             {"alpha1", r.alpha1},
                             {"alpha2", r.alpha2},
                             {"offdiag_residual", r.offdiag_residual},
                             {"isotropic", r.isotropic},
                             {"lhs", r.lhs},
                             {"threshold", r.threshold},
                             {"satisfied", r.satisfied}};
    std::cout << out.dump(1) << "\n";
    return kExitOk;
  });
}

int WorkerCount() {
  if (const char* env = std::getenv("CARTAN_SYNC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int Main(int argc, char** argv) {
  CLI::App app{"Synchronization over special Euclidean and matrix motion groups"};
  app.require_subcommand(1);

  std::string config;
  auto* generate = app.add_subcommand("generate", "Write ground truth and measurement graphs");
  generate->add_option("--config", config, "Experiment config (JSON)")->required();

  std::string graph_path, method, lambda_text = "auto", out_path;
  int align_budget = -1, lambda_budget = 8;
  auto* solve = app.add_subcommand("solve", "Solve one measurement graph");
  solve->add_option("--graph", graph_path, "Graph file")->required();
  solve->add_option("--method", method, "contraction-spectral, contraction-pd, separation, se-spectral, "
                                        "separation-mmg or plugin:<name>")
      ->required();
  solve->add_option("--lambda", lambda_text, "Contraction parameter or 'auto'");
  solve->add_option("--align-budget", align_budget, "Objective evaluations for the alignment search");
  solve->add_option("--lambda-budget", lambda_budget, "Candidates tried by the automatic lambda choice");
  solve->add_option("--out", out_path, "Solution file")->required();

  std::string solution_path, truth_path, csv_path;
  auto* eval = app.add_subcommand("eval", "Score a solution against ground truth");
  eval->add_option("--solution", solution_path, "Solution file")->required();
  eval->add_option("--truth", truth_path, "Truth file")->required();
  eval->add_option("--csv", csv_path, "Results CSV to append to")->required();

  auto* sweep = app.add_subcommand("sweep", "Generate, solve and evaluate a whole grid");
  sweep->add_option("--config", config, "Experiment config (JSON)")->required();

  int n = 0, samples = 100000, d = 3;
  double sigma_rot = 0.0, sigma_trans = 0.0;
  std::string density = "gaussian";
  std::uint64_t seed = 0;
  auto* gap = app.add_subcommand("gapcheck", "Estimate the spectral-gap condition for SE(d) noise");
  gap->add_option("--n", n, "Number of group elements")->required();
  gap->add_option("--sigma-rot", sigma_rot, "Rotation noise sigma")->required();
  gap->add_option("--sigma-trans", sigma_trans, "Translation noise scale (contracted units)")->required();
  gap->add_option("--samples", samples, "Monte-Carlo samples");
  gap->add_option("--d", d, "Dimension");
  gap->add_option("--density", density, "Translation density: gaussian, point or ball");
  gap->add_option("--seed", seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (*generate) return CmdGenerate(config);
  if (*sweep) return CmdSweep(config);
  if (*eval) return CmdEval(solution_path, truth_path, csv_path);
  if (*gap) return CmdGapcheck(n, sigma_rot, sigma_trans, samples, d, density, seed);

  SolveRequest req{method, std::nullopt, align_budget, lambda_budget};
  if (lambda_text != "auto") {
    char* end = nullptr;
    const double x = std::strtod(lambda_text.c_str(), &end);
    if (end == lambda_text.c_str() || *end != '\0' || !std::isfinite(x)) {
      std::cerr << "InvalidArgument: --lambda must be a number or 'auto'\n";
      return kExitInput;
    }
    req.lambda = x;
  }
  return CmdSolve(graph_path, req, out_path);
}

}  // namespace cartan_sync::cli
