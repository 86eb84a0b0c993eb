#include <gtest/gtest.h>

#include "cartan_sync/error.hpp"
#include "cartan_sync/group.hpp"
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

}  // namespace

TEST(Rotation, RejectsNonOrthogonal) {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 1) = 1e-6;
  EXPECT_EQ(CodeOf([&] { Rotation(m, true); }), ErrorCode::kInvalidArgument);
  Matrix reflect = Matrix::Identity(3, 3);
  reflect(2, 2) = -1.0;
  EXPECT_EQ(CodeOf([&] { Rotation(reflect, true); }), ErrorCode::kInvalidArgument);
  EXPECT_NO_THROW(Rotation(reflect, false));
  EXPECT_EQ(CodeOf([&] { Rotation(Matrix::Identity(2, 3), false); }), ErrorCode::kDimensionMismatch);
}

TEST(ProjectToRotation, MatchesPolarOracle) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = oracle::Gaussian(4, 4, rng);
    const Rotation o = ProjectToRotation(a, false);
    EXPECT_LE((o.matrix() - oracle::PolarFactor(a)).norm(), 1e-12);
    const Rotation s = ProjectToRotation(a, true);
    EXPECT_NEAR(s.matrix().determinant(), 1.0, 1e-12);
    // The special projection is at least as far from a as the unconstrained one.
    EXPECT_GE((s.matrix() - a).norm() + 1e-12, (o.matrix() - a).norm());
  }
}

TEST(ProjectToRotation, RankDeficient) {
  EXPECT_EQ(CodeOf([] { ProjectToRotation(Matrix::Zero(3, 3), true); }), ErrorCode::kRankDeficient);
}

TEST(SE, ComposeMatchesHomogeneousProduct) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const RigidMotion a = oracle::RandomSE(3, 3.0, rng);
    const RigidMotion b = oracle::RandomSE(3, 3.0, rng);
    EXPECT_LE((Compose(a, b).Homogeneous() - a.Homogeneous() * b.Homogeneous()).norm(), 1e-13);
    EXPECT_LE((Compose(a, Inverse(a)).Homogeneous() - Matrix::Identity(4, 4)).norm(), 1e-13);
  }
}

TEST(MMG, GroupLaws) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const MMGElement a = oracle::RandomMMG(4, 3, 2.0, rng);
    const MMGElement b = oracle::RandomMMG(4, 3, 2.0, rng);
    const MMGElement c = oracle::RandomMMG(4, 3, 2.0, rng);
    EXPECT_LE(oracle::ElementGap(Compose(Compose(a, b), c), Compose(a, Compose(b, c))), 1e-13);
    EXPECT_LE(oracle::ElementGap(Compose(a, Inverse(a)), MMGElement::Identity(4, 3)), 1e-13);
    EXPECT_LE(oracle::ElementGap(Compose(MMGElement::Identity(4, 3), a), a), 0.0);
    // The action X -> mu X eta^T + B is a homomorphism.
    const Matrix x = oracle::Gaussian(4, 3, rng);
    auto act = [](const MMGElement& g, const Matrix& m) -> Matrix {
      return g.mu.matrix() * m * g.eta.matrix().transpose() + g.B;
    };
    EXPECT_LE((act(Compose(a, b), x) - act(a, act(b, x))).norm(), 1e-12);
  }
}

TEST(SeLog, MatchesGeneralLog) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const RigidMotion g = oracle::RandomSE(3, 2.0, rng);
    const Matrix l = SeLog(g);
    EXPECT_LE((oracle::SeriesExp(l) - g.Homogeneous()).norm(), 1e-11);
    EXPECT_LE(l.bottomRows(1).norm(), 1e-14);
  }
}

TEST(RodriguesExp, MatchesSeries) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector b = oracle::Gaussian(3, 1, rng);
    const Rotation r = RodriguesExp(TangentP::SE(b));
    EXPECT_LE((r.matrix() - oracle::SeriesExp(oracle::Embed(b))).norm(), 1e-13);
    EXPECT_NEAR(SkewAngle(SkewEmbed(TangentP::SE(b))), b.norm(), 1e-13);
  }
}

TEST(HybridDistance, MetricBasics) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const GroupElement a = oracle::RandomSE(3, 2.0, rng);
    const GroupElement b = oracle::RandomSE(3, 2.0, rng);
    const GroupElement c = oracle::RandomSE(3, 2.0, rng);
    EXPECT_EQ(HybridDistance(a, a), 0.0);
    EXPECT_DOUBLE_EQ(HybridDistance(a, b), HybridDistance(b, a));
    EXPECT_LE(HybridDistance(a, c), HybridDistance(a, b) + HybridDistance(b, c) + 1e-12);
  }
}

TEST(CheckElement, DimensionMismatch) {
  const GroupElement g = RigidMotion::Identity(3);
  EXPECT_NO_THROW(CheckElement(GroupSpec::SE(3), g));
  EXPECT_EQ(CodeOf([&] { CheckElement(GroupSpec::SE(2), g); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(CodeOf([&] { CheckElement(GroupSpec::MMG(3, 1), g); }), ErrorCode::kDimensionMismatch);
}

TEST(GroupSpec, NamesRoundTrip) {
  for (GroupKind k : {GroupKind::kSE, GroupKind::kMMG, GroupKind::kSO, GroupKind::kO}) {
    EXPECT_EQ(ParseGroupKind(GroupKindName(k)), k);
  }
  EXPECT_EQ(CodeOf([] { ParseGroupKind("SL"); }), ErrorCode::kConfigInvalid);
  EXPECT_EQ(GroupSpec::SE(3).CompactOrder(), 4);
  EXPECT_EQ(GroupSpec::MMG(4, 3).CompactOrder(), 7);
  EXPECT_EQ(GroupSpec::MMG(4, 3).TangentDim(), 12);
}
