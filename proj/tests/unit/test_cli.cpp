#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cartan_sync_cli/commands.hpp"
#include "cartan_sync_cli/config.hpp"
#include "cartan_sync_cli/io.hpp"
#include "oracles.hpp"

using namespace cartan_sync;
using namespace cartan_sync::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cartan_sync_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  void Write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  int Run(std::vector<std::string> args) {
    args.insert(args.begin(), "cartan-sync");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return Main(static_cast<int>(argv.size()), argv.data());
  }

  std::string Config(const std::string& extra, int n = 10) const {
    return R"({"group": {"kind": "SE", "d": 3}, "n": )" + std::to_string(n) + R"(, "seed": 7, "output_path": ")" + dir_.string() + "\"" + extra +
           "}";
  }

  fs::path dir_;
};

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> Columns(const std::string& row) {
  std::vector<std::string> out;
  std::istringstream in(row);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  if (!row.empty() && row.back() == ',') out.push_back("");
  return out;
}

}  // namespace

TEST(CliIo, RoundTripIsExact) {
  for (const GroupSpec& group : {GroupSpec::SE(3), GroupSpec::MMG(4, 3)}) {
    const auto truth = SampleGroundTruth(8, group, 3);
    const MeasurementSet set = MakeMeasurements(truth, group, NoiseSpec{0.1, 0.2, 0.1, 0.6, 4});
    const GraphFile graph{set.graph, GraphMeta{0.6, set.snr_db, 0.1, 2, 99}};
    const std::string text = WriteGraph(graph);
    const GraphFile back = ParseGraph(text);
    ASSERT_EQ(back.graph.edges().size(), set.graph.edges().size());
    for (std::size_t k = 0; k < back.graph.edges().size(); ++k) {
      EXPECT_EQ(back.graph.edges()[k].i, set.graph.edges()[k].i);
      EXPECT_EQ(oracle::ElementGap(back.graph.edges()[k].g, set.graph.edges()[k].g), 0.0);
    }
    EXPECT_EQ(back.meta->snr_db, set.snr_db);
    EXPECT_EQ(WriteGraph(back), text);

    const std::string truth_text = WriteTruth({group, truth});
    const TruthFile truth_back = ParseTruth(truth_text);
    for (std::size_t i = 0; i < truth.size(); ++i) EXPECT_EQ(oracle::ElementGap(truth_back.elements[i], truth[i]), 0.0);
    EXPECT_EQ(WriteTruth(truth_back), truth_text);

    SyncSolution sol{group, truth, 12.5, {"spectral", 0.125, 3.0, 0.5, 7, 0.25}};
    const std::string sol_text = WriteSolution({"contraction-spectral", sol, std::nullopt});
    const SolutionFile sol_back = ParseSolution(sol_text);
    EXPECT_EQ(sol_back.solution.lambda_used, 12.5);
    EXPECT_EQ(sol_back.solution.diagnostics.eigengap, 0.5);
    EXPECT_EQ(WriteSolution(sol_back), sol_text);
  }
}

TEST(CliIo, MalformedInput) {
  EXPECT_THROW(ParseGraph("{"), Error);
  EXPECT_THROW(ParseGraph(R"({"group": {"kind": "SE", "d": 3}, "n": 2, "edges": [{"i": 1, "j": 2}]})"), Error);
  try {
    ParseTruth(R"({"group": {"kind": "XX", "d": 3}, "n": 1, "elements": []})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigInvalid);
  }
}

TEST(CliConfig, ParsingAndCells) {
  const ExperimentConfig c = ParseConfig(R"({"group": {"kind": "SE", "d": 3}, "n": 20,
      "methods": ["separation", "contraction-spectral"],
      "noise": {"sigma_rot": [0.1, 0.2], "sigma_trans": 0.1, "p": [0.3, 0.6, 1.0]},
      "lambda": ["auto", 40], "trials_per_cell": 2})");
  EXPECT_EQ(c.methods.size(), 2u);
  ASSERT_EQ(c.lambda.size(), 2u);
  EXPECT_FALSE(c.lambda[0].has_value());
  EXPECT_EQ(c.lambda[1], 40.0);
  const auto cells = ExpandCells(c);
  ASSERT_EQ(cells.size(), 6u);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(cells[k].index, k);
  EXPECT_EQ(cells[0].p, 0.3);
  EXPECT_EQ(cells[1].sigma_rot, 0.2);

  EXPECT_THROW(ParseConfig(R"({"group": {"kind": "SE", "d": 3}, "n": 20, "methods": ["separation-mmg"]})"), Error);
  EXPECT_THROW(ParseConfig(R"({"group": {"kind": "SE", "d": 3}, "n": 20, "methods": ["nope"]})"), Error);
  EXPECT_THROW(ParseConfig(R"({"group": {"kind": "SE", "d": 3}, "n": 20, "noise": {"p": []}})"), Error);
  EXPECT_THROW(ParseConfig(R"({"group": {"kind": "SE", "d": 3}, "n": 20, "lambda": 0.5})"), Error);
  EXPECT_THROW(ParseConfig(R"({"n": 20})"), Error);
  EXPECT_NE(NoiseSeed(1, 0, 0), NoiseSeed(1, 1, 0));
  EXPECT_NE(NoiseSeed(1, 0, 0), NoiseSeed(1, 0, 1));
  EXPECT_EQ(TruthSeed(5, 3), TruthSeed(5, 3));
}

TEST(CliExitCodes, Mapping) {
  EXPECT_EQ(ExitCodeFor(ErrorCode::kConfigInvalid), 2);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kIOError), 2);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kDimensionMismatch), 2);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kLambdaTooSmall), 3);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kGraphDisconnected), 3);
}

TEST_F(CliTest, GenerateMinimal) {
  Write("c.json", Config(""));
  ASSERT_EQ(Run({"generate", "--config", Path("c.json")}), 0);
  EXPECT_TRUE(fs::exists(Path("truth_t0.json")));
  EXPECT_TRUE(fs::exists(Path("graph_c0_t0.json")));
  EXPECT_EQ(ParseGraph(ReadFile(Path("graph_c0_t0.json"))).graph.edges().size(), 45u);
}

TEST_F(CliTest, GenerateGridIsByteIdentical) {
  Write("c.json", Config(R"(, "noise": {"p": [0.4, 0.7, 1.0], "sigma_rot": [0.05, 0.1], "sigma_trans": 0.1})"));
  ASSERT_EQ(Run({"generate", "--config", Path("c.json")}), 0);
  std::vector<std::string> first;
  for (int c = 0; c < 6; ++c) first.push_back(ReadFile(Path("graph_c" + std::to_string(c) + "_t0.json")));
  EXPECT_FALSE(fs::exists(Path("graph_c6_t0.json")));
  ASSERT_EQ(Run({"generate", "--config", Path("c.json")}), 0);
  for (int c = 0; c < 6; ++c) EXPECT_EQ(ReadFile(Path("graph_c" + std::to_string(c) + "_t0.json")), first[c]);
}

TEST_F(CliTest, SolveAndEval) {
  Write("c.json", Config(""));
  ASSERT_EQ(Run({"generate", "--config", Path("c.json")}), 0);
  ASSERT_EQ(Run({"solve", "--graph", Path("graph_c0_t0.json"), "--method", "contraction-spectral", "--out",
                 Path("s.json")}),
            0);
  const SolutionFile sol = ParseSolution(ReadFile(Path("s.json")));
  EXPECT_LE(sol.solution.diagnostics.residual, 1e-6);
  const GraphFile graph = ParseGraph(ReadFile(Path("graph_c0_t0.json")));
  double max_b = 0.0;
  for (const Edge& e : graph.graph.edges()) max_b = std::max(max_b, LinearPartNorm(e.g));
  ASSERT_TRUE(sol.solution.lambda_used.has_value());
  EXPECT_GE(*sol.solution.lambda_used, 2.0 / 0.59 * max_b * (1 - 1e-12));

  ::testing::internal::CaptureStdout();
  ASSERT_EQ(Run({"eval", "--solution", Path("s.json"), "--truth", Path("truth_t0.json"), "--csv", Path("r.csv")}), 0);
  const std::string printed = ::testing::internal::GetCapturedStdout();
  const auto lines = Lines(ReadFile(Path("r.csv")));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], kCsvHeader);
  const auto cols = Columns(lines[1]);
  ASSERT_EQ(cols.size(), 14u);
  EXPECT_EQ(cols[0], "contraction-spectral");
  EXPECT_EQ(cols[1], "SE");
  EXPECT_EQ(cols[9], "0");
  EXPECT_LE(std::stod(cols[11]), 1e-6);
  EXPECT_EQ(cols[13], "");
  EXPECT_NEAR(std::stod(printed), std::stod(cols[11]), 1e-5 * std::stod(cols[11]));
}

TEST_F(CliTest, EvalExactAndGaugeShift) {
  const auto truth = SampleGroundTruth(10, GroupSpec::SE(3), 1);
  Write("t.json", WriteTruth({GroupSpec::SE(3), truth}));
  Write("s.json", WriteSolution({"separation", SyncSolution{GroupSpec::SE(3), truth, std::nullopt, {}}, std::nullopt}));
  std::mt19937_64 rng(2);
  const GroupElement g = oracle::RandomSE(3, 2.0, rng);
  std::vector<GroupElement> shifted;
  for (const auto& e : truth) shifted.push_back(Compose(e, g));
  Write("g.json",
        WriteSolution({"separation", SyncSolution{GroupSpec::SE(3), shifted, std::nullopt, {}}, std::nullopt}));
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(Run({"eval", "--solution", Path("s.json"), "--truth", Path("t.json"), "--csv", Path("r.csv")}), 0);
  EXPECT_EQ(Run({"eval", "--solution", Path("g.json"), "--truth", Path("t.json"), "--csv", Path("r.csv")}), 0);
  ::testing::internal::GetCapturedStdout();
  const auto lines = Lines(ReadFile(Path("r.csv")));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_LE(std::stod(Columns(lines[1])[11]), 1e-14);
  EXPECT_LE(std::stod(Columns(lines[2])[11]), 1e-12);
}

TEST_F(CliTest, CorruptFileLeavesCsvAlone) {
  const auto truth = SampleGroundTruth(4, GroupSpec::SE(3), 1);
  Write("t.json", WriteTruth({GroupSpec::SE(3), truth}));
  Write("bad.json", "{\"method\": \"separation\", \"group\": ");
  Write("r.csv", std::string(kCsvHeader) + "\n");
  const std::string before = ReadFile(Path("r.csv"));
  EXPECT_EQ(Run({"eval", "--solution", Path("bad.json"), "--truth", Path("t.json"), "--csv", Path("r.csv")}), 2);
  EXPECT_EQ(Run({"eval", "--solution", Path("missing.json"), "--truth", Path("t.json"), "--csv", Path("r.csv")}),
            2);
  EXPECT_EQ(ReadFile(Path("r.csv")), before);
}

TEST_F(CliTest, SolveErrors) {
  Write("c.json", Config(""));
  ASSERT_EQ(Run({"generate", "--config", Path("c.json")}), 0);
  EXPECT_EQ(Run({"solve", "--graph", Path("graph_c0_t0.json"), "--method", "separation-mmg", "--out", Path("s.json")}),
            2);
  EXPECT_EQ(Run({"solve", "--graph", Path("graph_c0_t0.json"), "--method", "contraction-spectral", "--lambda", "1",
                 "--out", Path("s.json")}),
            3);
  EXPECT_EQ(Run({"solve", "--graph", Path("graph_c0_t0.json"), "--method", "plugin:unknown", "--out", Path("s.json")}),
            2);
  EXPECT_EQ(Run({"solve", "--graph", Path("nothing.json"), "--method", "separation", "--out", Path("s.json")}), 2);
  EXPECT_FALSE(fs::exists(Path("s.json")));
  EXPECT_EQ(Run({"solve", "--graph", Path("graph_c0_t0.json")}), 2);
}

TEST_F(CliTest, SweepRowsAndDeterminism) {
  Write("c.json", Config(R"(, "methods": ["separation", "se-spectral", "contraction-spectral"],
      "noise": {"sigma_rot": 0.05, "sigma_trans": 0.05}, "lambda": 40, "align_budget": 20)"));
  ASSERT_EQ(Run({"sweep", "--config", Path("c.json")}), 0);
  const auto first = Lines(ReadFile(Path("results.csv")));
  ASSERT_EQ(first.size(), 4u);
  EXPECT_EQ(Columns(first[1])[0], "separation");
  EXPECT_EQ(Columns(first[1])[8], "");
  EXPECT_EQ(Columns(first[2])[0], "se-spectral");
  EXPECT_EQ(Columns(first[3])[0], "contraction-spectral");
  EXPECT_EQ(std::stod(Columns(first[3])[8]), 40.0);
  fs::remove(Path("results.csv"));
  ASSERT_EQ(Run({"sweep", "--config", Path("c.json")}), 0);
  const auto second = Lines(ReadFile(Path("results.csv")));
  ASSERT_EQ(second.size(), first.size());
  for (std::size_t k = 1; k < first.size(); ++k) {
    auto a = Columns(first[k]);
    auto b = Columns(second[k]);
    a[12] = b[12] = "";
    EXPECT_EQ(a, b);
  }
}

TEST_F(CliTest, SweepGridOrderAndThreads) {
  Write("c.json", Config(R"(, "methods": ["separation"], "noise": {"sigma_rot": [0.01, 0.02], "sigma_trans": 0.01,
      "p": [0.5, 1.0]}, "trials_per_cell": 2)"));
  setenv("CARTAN_SYNC_THREADS", "3", 1);
  EXPECT_EQ(WorkerCount(), 3);
  ASSERT_EQ(Run({"sweep", "--config", Path("c.json")}), 0);
  unsetenv("CARTAN_SYNC_THREADS");
  const auto lines = Lines(ReadFile(Path("results.csv")));
  ASSERT_EQ(lines.size(), 9u);
  for (int k = 0; k < 8; ++k) {
    const auto cols = Columns(lines[k + 1]);
    EXPECT_EQ(cols[9], std::to_string(k % 2));
    EXPECT_EQ(std::stod(cols[5]), k < 4 ? 0.5 : 1.0);
  }
}

TEST_F(CliTest, SweepRecordsFailures) {
  Write("c.json", Config(R"(, "methods": ["separation"], "noise": {"p": 0.03})", 40));
  ASSERT_EQ(Run({"sweep", "--config", Path("c.json")}), 0);
  const auto lines = Lines(ReadFile(Path("results.csv")));
  ASSERT_EQ(lines.size(), 2u);
  const auto cols = Columns(lines[1]);
  EXPECT_EQ(cols[13], "ConnectivityFailure");
  EXPECT_EQ(cols[11], "");
}

TEST_F(CliTest, Gapcheck) {
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(Run({"gapcheck", "--n", "16", "--sigma-rot", "0.3", "--sigma-trans", "0", "--samples", "10000"}), 0);
  const std::string out = ::testing::internal::GetCapturedStdout();
  EXPECT_NE(out.find("\"satisfied\": true"), std::string::npos);
  EXPECT_NE(out.find("\"beta\""), std::string::npos);
  EXPECT_EQ(Run({"gapcheck", "--n", "16", "--sigma-rot", "0.3", "--sigma-trans", "4", "--density", "ball"}), 2);
  EXPECT_EQ(Run({"gapcheck", "--n", "16", "--sigma-rot", "0.3", "--sigma-trans", "0.1", "--samples", "10"}), 2);
}
