#include <benchmark/benchmark.h>

#include "cartan_sync/contraction.hpp"
#include "cartan_sync/harness.hpp"
#include "cartan_sync/matrix_functions.hpp"
#include "cartan_sync/spectral.hpp"
#include "cartan_sync/sync.hpp"

using namespace cartan_sync;

namespace {

MeasurementGraph CleanGraph(const GroupSpec& group, int n, double p = 1.0, double sigma = 0.0) {
  const auto truth = SampleGroundTruth(n, group, 7);
  return MakeMeasurements(truth, group, NoiseSpec{sigma, sigma, 0.0, p, 11}).graph;
}

void BM_MatExp(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  Matrix a = Matrix::Random(k, k);
  a = (0.5 * (a - a.transpose())).eval();
  for (auto _ : state) benchmark::DoNotOptimize(MatExp(a));
}
BENCHMARK(BM_MatExp)->Arg(4)->Arg(7)->Arg(16);

void BM_CartanDecomposeSO(benchmark::State& state) {
  const auto g = std::get<RigidMotion>(SampleGroundTruth(2, GroupSpec::SE(3), 3)[1]);
  const CompactImage c = Psi(g, 50.0);
  for (auto _ : state) benchmark::DoNotOptimize(CartanDecomposeSO(c.Q));
}
BENCHMARK(BM_CartanDecomposeSO);

void BM_CartanDecomposeOpt(benchmark::State& state) {
  const auto g = std::get<MMGElement>(SampleGroundTruth(2, GroupSpec::MMG(4, 3), 3)[1]);
  const CompactImage c = Psi(g, 50.0);
  for (auto _ : state) benchmark::DoNotOptimize(CartanDecomposeOpt(c.Q, 4, 3));
}
BENCHMARK(BM_CartanDecomposeOpt);

void BM_SpectralSync(benchmark::State& state) {
  const MeasurementGraph g = RotationPartGraph(CleanGraph(GroupSpec::SE(3), static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(SpectralSyncCompact(g));
}
BENCHMARK(BM_SpectralSync)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SeparationSync(benchmark::State& state) {
  const MeasurementGraph g = CleanGraph(GroupSpec::SE(3), static_cast<int>(state.range(0)), 0.2, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(SeparationSync(g));
}
BENCHMARK(BM_SeparationSync)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ContractionSync(benchmark::State& state) {
  const MeasurementGraph g = CleanGraph(GroupSpec::SE(3), static_cast<int>(state.range(0)), 0.2, 0.05);
  ContractionOptions options;
  options.lambda = 50.0;
  for (auto _ : state) benchmark::DoNotOptimize(ContractionSync(g, options));
}
BENCHMARK(BM_ContractionSync)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
