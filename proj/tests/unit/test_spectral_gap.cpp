#include <gtest/gtest.h>

#include <cmath>

#include "cartan_sync/error.hpp"
#include "cartan_sync/spectral_gap.hpp"
#include "oracles.hpp"

using namespace cartan_sync;

namespace {

using Kind = TranslationDensity::Kind;

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

TEST(SpectralGap, DegenerateNoise) {
  const SpectralGapReport r = SpectralGapCondition({Kind::kPointMass, 0.0}, {3, 0.0}, 16, 10000, 1);
  EXPECT_DOUBLE_EQ(r.alpha1, 0.0);
  EXPECT_DOUBLE_EQ(r.alpha2, 0.0);
  EXPECT_DOUBLE_EQ(r.gamma, 1.0);
  EXPECT_NEAR(r.beta, 1.0, 1e-12);
  EXPECT_NEAR(r.lhs, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.threshold, 0.25);
  EXPECT_TRUE(r.satisfied);
  EXPECT_TRUE(r.isotropic);
}

TEST(SpectralGap, BetaMatchesQuadrature) {
  for (double sigma : {0.2, 0.6, 1.0, 1.5}) {
    const SpectralGapReport r = SpectralGapCondition({Kind::kPointMass, 0.0}, {3, sigma}, 4, 100000, 2);
    EXPECT_NEAR(r.beta, oracle::WrappedBeta3(sigma), 0.02 * oracle::WrappedBeta3(sigma)) << sigma;
    EXPECT_TRUE(r.isotropic);
    EXPECT_NEAR(r.lhs, r.beta, 1e-12);
  }
}

TEST(SpectralGap, MonotoneInN) {
  bool previous = false;
  for (int n : {2, 4, 16, 64, 256, 1024}) {
    const SpectralGapReport r = SpectralGapCondition({Kind::kGaussian, 0.3}, {3, 1.3}, n, 20000, 3);
    EXPECT_TRUE(!previous || r.satisfied) << n;
    previous = r.satisfied;
  }
  EXPECT_TRUE(previous);
}

TEST(SpectralGap, StableAcrossSeeds) {
  const SpectralGapReport a = SpectralGapCondition({Kind::kGaussian, 0.1}, {3, 0.3}, 10, 100000, 4);
  const SpectralGapReport b = SpectralGapCondition({Kind::kGaussian, 0.1}, {3, 0.3}, 10, 100000, 5);
  for (auto [x, y] : {std::pair{a.beta, b.beta}, {a.gamma, b.gamma}, {a.alpha1, b.alpha1}, {a.alpha2, b.alpha2}}) {
    EXPECT_NEAR(x, y, 0.02 * std::max(std::abs(x), std::abs(y)));
  }
  EXPECT_GT(a.alpha2, a.alpha1);
}

TEST(SpectralGap, SmallNoiseSatisfiedFromFour) {
  for (int n : {4, 8, 100}) {
    EXPECT_TRUE(SpectralGapCondition({Kind::kGaussian, 1e-3}, {3, 0.05}, n, 10000, 6).satisfied);
  }
}

TEST(SpectralGap, Errors) {
  EXPECT_EQ(CodeOf([] { SpectralGapCondition({Kind::kUniformBall, 4.0}, {3, 0.1}, 10, 10000); }),
            ErrorCode::kUnsupportedDensity);
  EXPECT_EQ(CodeOf([] { SpectralGapCondition({Kind::kGaussian, 0.1}, {3, 0.1}, 10, 9999); }),
            ErrorCode::kInvalidArgument);
  EXPECT_NO_THROW(SpectralGapCondition({Kind::kUniformBall, 3.0}, {3, 0.1}, 10, 10000));
}
