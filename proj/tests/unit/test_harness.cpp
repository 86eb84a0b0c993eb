#include <gtest/gtest.h>

#include <cmath>

#include "cartan_sync/error.hpp"
#include "cartan_sync/harness.hpp"
#include "oracles.hpp"

using namespace cartan_sync;

namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIOError;
}

// exp of the homogeneous algebra element [[w^, u], [0, 0]].
RigidMotion SeExp(const Vector& w, const Vector& u) {
  Matrix x = Matrix::Zero(4, 4);
  x(0, 1) = -w(2);
  x(0, 2) = w(1);
  x(1, 2) = -w(0);
  x(1, 0) = w(2);
  x(2, 0) = -w(1);
  x(2, 1) = w(0);
  x.topRightCorner(3, 1) = u;
  const Matrix h = oracle::SeriesExp(x);
  return {ProjectToRotation(h.topLeftCorner(3, 3), true), h.topRightCorner(3, 1)};
}

std::vector<GroupElement> ApplyGauge(const std::vector<GroupElement>& est, const GroupElement& g) {
  std::vector<GroupElement> out;
  for (const auto& e : est) out.push_back(Compose(e, g));
  return out;
}

GroupElement RandomGauge(const GroupSpec& group, std::mt19937_64& rng, double scale) {
  if (group.kind == GroupKind::kSE) return oracle::RandomSE(group.d, scale, rng);
  return oracle::RandomMMG(group.d, group.l, scale, rng);
}

Rotation NearIdentity(int d, std::mt19937_64& rng, double scale) {
  Matrix s = oracle::Gaussian(d, d, rng, scale);
  return Rotation(oracle::SeriesExp(s - s.transpose()), false);
}

GroupElement SmallGauge(const GroupSpec& group, std::mt19937_64& rng, double scale) {
  if (group.kind == GroupKind::kSE) {
    return RigidMotion(Rotation(NearIdentity(group.d, rng, scale).matrix(), true),
                       oracle::Gaussian(group.d, 1, rng, scale));
  }
  return MMGElement(NearIdentity(group.d, rng, scale), NearIdentity(group.l, rng, scale),
                    oracle::Gaussian(group.d, group.l, rng, scale));
}

}  // namespace

TEST(GroundTruth, Deterministic) {
  for (const GroupSpec& g : {GroupSpec::SE(3), GroupSpec::MMG(4, 3)}) {
    const auto a = SampleGroundTruth(20, g, 42);
    const auto b = SampleGroundTruth(20, g, 42);
    const auto c = SampleGroundTruth(20, g, 43);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(oracle::ElementGap(a[i], b[i]), 0.0);
    EXPECT_GT(oracle::ElementGap(a[5], c[5]), 0.0);
  }
}

TEST(GroundTruth, RotationsValidAndTranslationMean) {
  const auto truth = SampleGroundTruth(33334, GroupSpec::SE(3), 1);
  double sum = 0.0;
  for (const auto& g : truth) {
    const auto& m = std::get<RigidMotion>(g);
    EXPECT_LE((m.mu.matrix().transpose() * m.mu.matrix() - Matrix::Identity(3, 3)).norm(), 1e-10);
    sum += m.b.sum();
    EXPECT_GE(m.b.minCoeff(), 0.0);
    EXPECT_LE(m.b.maxCoeff(), 2.0);
  }
  const double mean = sum / (3.0 * truth.size());
  EXPECT_GE(mean, 0.99);
  EXPECT_LE(mean, 1.01);
  EXPECT_EQ(CodeOf([] { SampleGroundTruth(1, GroupSpec::SE(3), 0); }), ErrorCode::kInvalidArgument);
}

TEST(NoiseSpec, Validation) {
  EXPECT_EQ(CodeOf([] { NoiseSpec{-1.0, 0.0, 0.0, 1.0, 0}.Validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { NoiseSpec{0.0, 0.0, 1.0, 1.0, 0}.Validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { NoiseSpec{0.0, 0.0, 0.0, 0.0, 0}.Validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_TRUE((NoiseSpec{0.0, 0.0, 0.0, 0.1, 0}.PlausiblyConnected(100)));
  EXPECT_FALSE((NoiseSpec{0.0, 0.0, 0.0, 0.01, 0}.PlausiblyConnected(100)));
}

TEST(Measurements, CleanFullGraph) {
  const auto truth = SampleGroundTruth(12, GroupSpec::SE(3), 3);
  const MeasurementSet s = MakeMeasurements(truth, GroupSpec::SE(3), NoiseSpec{});
  EXPECT_EQ(s.graph.edges().size(), 66u);
  EXPECT_TRUE(std::isinf(s.snr_db));
  for (const Edge& e : s.graph.edges()) {
    EXPECT_LE(HybridDistance(e.g, Compose(truth[e.i], Inverse(truth[e.j]))), 1e-12);
  }
}

TEST(Measurements, EdgeCountAndDeterminism) {
  const auto truth = SampleGroundTruth(40, GroupSpec::SE(3), 3);
  const NoiseSpec spec{0.1, 0.1, 0.2, 0.3, 9};
  const MeasurementSet a = MakeMeasurements(truth, GroupSpec::SE(3), spec);
  const MeasurementSet b = MakeMeasurements(truth, GroupSpec::SE(3), spec);
  EXPECT_EQ(a.graph.edges().size(), static_cast<std::size_t>(std::llround(0.3 * 780)));
  ASSERT_EQ(a.graph.edges().size(), b.graph.edges().size());
  for (std::size_t k = 0; k < a.graph.edges().size(); ++k) {
    EXPECT_EQ(a.graph.edges()[k].i, b.graph.edges()[k].i);
    EXPECT_EQ(a.graph.edges()[k].j, b.graph.edges()[k].j);
    EXPECT_EQ(oracle::ElementGap(a.graph.edges()[k].g, b.graph.edges()[k].g), 0.0);
  }
  EXPECT_EQ(a.snr_db, b.snr_db);
}

TEST(Measurements, OutlierBookkeeping) {
  for (const GroupSpec& group : {GroupSpec::SE(3), GroupSpec::MMG(3, 2)}) {
    const auto truth = SampleGroundTruth(30, group, 4);
    const MeasurementSet s = MakeMeasurements(truth, group, NoiseSpec{0.0, 0.0, 0.4, 1.0, 2});
    const auto& edges = s.graph.edges();
    std::size_t failing = 0;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const bool bad = HybridDistance(edges[k].g, Compose(truth[edges[k].i], Inverse(truth[edges[k].j]))) > 1e-6;
      EXPECT_EQ(bad, s.outlier[k] != 0);
      failing += bad;
    }
    EXPECT_EQ(failing, static_cast<std::size_t>(std::llround(0.4 * edges.size())));
  }
}

TEST(Measurements, ConnectivityFailure) {
  const auto truth = SampleGroundTruth(50, GroupSpec::SE(3), 4);
  EXPECT_EQ(CodeOf([&] { MakeMeasurements(truth, GroupSpec::SE(3), NoiseSpec{0.0, 0.0, 0.0, 0.02, 1}); }),
            ErrorCode::kConnectivityFailure);
}

TEST(Measurements, NoiseIsCentered) {
  const double sigma = 0.3;
  const auto truth = SampleGroundTruth(448, GroupSpec::SE(3), 5);
  const MeasurementSet s = MakeMeasurements(truth, GroupSpec::SE(3), NoiseSpec{0.0, sigma, 0.0, 1.0, 6});
  ASSERT_GE(s.noise.size(), 100000u);
  Vector mean = Vector::Zero(3);
  for (const auto& g : s.noise) mean += std::get<RigidMotion>(g).b;
  mean /= static_cast<double>(s.noise.size());
  EXPECT_LE(mean.norm(), 3.0 * sigma / std::sqrt(1e5));
}

TEST(Measurements, WrappedRotationsBelowPi) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    const Rotation r = SampleWrappedRotation(3, 2.0, rng);
    const double c = std::clamp((r.matrix().trace() - 1.0) / 2.0, -1.0, 1.0);
    EXPECT_LT(std::acos(c), M_PI);
    EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-12);
  }
}

TEST(Snr, DecibelDefinition) {
  std::mt19937_64 rng(8);
  std::vector<GroupElement> clean, same, tenth, fifth;
  for (int k = 0; k < 10; ++k) {
    const Vector w = oracle::Gaussian(3, 1, rng, 0.5);
    const Vector u = oracle::Gaussian(3, 1, rng);
    clean.push_back(SeExp(w, u));
    same.push_back(SeExp(w, u));
    tenth.push_back(SeExp(w / 10, u / 10));
    fifth.push_back(SeExp(w / 5, u / 5));
  }
  EXPECT_NEAR(SnrDb(clean, same), 0.0, 1e-9);
  EXPECT_NEAR(SnrDb(clean, tenth), 20.0, 1e-9);
  EXPECT_NEAR(SnrDb(clean, tenth) - SnrDb(clean, fifth), 20.0 * std::log10(2.0), 1e-9);
}

TEST(Snr, ExcludesNoiseFreeEdges) {
  std::vector<GroupElement> clean{SeExp(Vector::Constant(3, 0.1), Vector::Ones(3)),
                                  SeExp(Vector::Constant(3, 0.2), Vector::Ones(3))};
  std::vector<GroupElement> noise{RigidMotion::Identity(3), SeExp(Vector::Constant(3, 0.02), Vector::Ones(3) / 10)};
  int excluded = 0;
  EXPECT_NEAR(SnrDb(clean, noise, &excluded), 20.0, 1e-9);
  EXPECT_EQ(excluded, 1);
  std::vector<GroupElement> none{RigidMotion::Identity(3), RigidMotion::Identity(3)};
  EXPECT_EQ(CodeOf([&] { SnrDb(clean, none); }), ErrorCode::kAllNoiseFree);
}

TEST(Snr, MonotoneInSigma) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto truth = SampleGroundTruth(15, GroupSpec::SE(3), seed);
    const double s = 0.05 + 0.01 * seed;
    const double lo = MakeMeasurements(truth, GroupSpec::SE(3), NoiseSpec{s, s, 0.0, 1.0, seed}).snr_db;
    const double hi_rot = MakeMeasurements(truth, GroupSpec::SE(3), NoiseSpec{1.5 * s, s, 0.0, 1.0, seed}).snr_db;
    const double hi_tr = MakeMeasurements(truth, GroupSpec::SE(3), NoiseSpec{s, 1.5 * s, 0.0, 1.0, seed}).snr_db;
    EXPECT_LT(hi_rot, lo);
    EXPECT_LT(hi_tr, lo);
  }
}

TEST(Snr, CalibrationHitsTarget) {
  const auto truth = SampleGroundTruth(100, GroupSpec::SE(3), 11);
  const Calibration c = CalibrateNoise(truth, GroupSpec::SE(3), NoiseSpec{0, 0, 0, 1.0, 12}, 12.0);
  EXPECT_NEAR(c.snr_db, 12.0, 1.5);
  EXPECT_NEAR(MakeMeasurements(truth, GroupSpec::SE(3), c.spec).snr_db, c.snr_db, 1e-12);
  EXPECT_DOUBLE_EQ(c.spec.sigma_rot, c.spec.sigma_trans);
}

TEST(Mse, ZeroAndGaugeInvariance) {
  std::mt19937_64 rng(13);
  for (const GroupSpec& group : {GroupSpec::SE(3), GroupSpec::MMG(4, 3)}) {
    const auto truth = SampleGroundTruth(15, group, 14);
    EXPECT_LE(Mse(truth, truth), 1e-14);
    const GroupElement g = RandomGauge(group, rng, 3.0);
    EXPECT_LE(Mse(ApplyGauge(truth, g), truth), 1e-12);
    const auto est = SampleGroundTruth(15, group, 15);
    EXPECT_NEAR(Mse(ApplyGauge(est, g), truth), Mse(est, truth), 1e-10);
  }
}

TEST(Mse, ClosedFormBeatsRandomGauges) {
  std::mt19937_64 rng(16);
  for (const GroupSpec& group : {GroupSpec::SE(3), GroupSpec::MMG(4, 3)}) {
    const auto truth = SampleGroundTruth(10, group, 17);
    const auto est = SampleGroundTruth(10, group, 18);
    const GroupElement opt = OptimalGauge(est, truth);
    const double best = GaugeObjective(est, truth, opt);
    EXPECT_NEAR(best, Mse(est, truth), 1e-12);
    for (int k = 0; k < 1000; ++k) {
      // Half far away, half a small perturbation of the optimum.
      const GroupElement g = k % 2 ? RandomGauge(group, rng, 3.0) : Compose(opt, SmallGauge(group, rng, 1e-3));
      EXPECT_LT(best, GaugeObjective(est, truth, g));
    }
  }
}

TEST(Mse, DimensionMismatch) {
  const auto a = SampleGroundTruth(5, GroupSpec::SE(3), 1);
  const auto b = SampleGroundTruth(6, GroupSpec::SE(3), 1);
  EXPECT_EQ(CodeOf([&] { Mse(a, b); }), ErrorCode::kDimensionMismatch);
}
