#pragma once

#include <optional>
#include <string>

#include "cartan_sync/error.hpp"
#include "cartan_sync/sync.hpp"
#include "cartan_sync_cli/config.hpp"

namespace cartan_sync::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;

/// Exit status for a library error: input/config/IO problems map to 2,
/// everything raised while solving maps to 3.
int ExitCodeFor(ErrorCode code);

struct SolveRequest {
  std::string method;
  std::optional<double> lambda;  // nullopt = auto
  int align_budget = -1;
  int lambda_budget = 8;
};

/// Runs one named method on a graph.
SyncSolution RunMethod(const MeasurementGraph& graph, const SolveRequest& request);

int CmdGenerate(const std::string& config_path);
int CmdSolve(const std::string& graph_path, const SolveRequest& request, const std::string& out_path);
int CmdEval(const std::string& solution_path, const std::string& truth_path, const std::string& csv_path);
int CmdSweep(const std::string& config_path);
int CmdGapcheck(int n, double sigma_rot, double sigma_trans, int samples, int d, const std::string& density,
                std::uint64_t seed);

/// Worker count: CARTAN_SYNC_THREADS when set, hardware parallelism otherwise.
int WorkerCount();

/// Entry point shared by the executable and the tests.
int Main(int argc, char** argv);

}  // namespace cartan_sync::cli
