#include "cartan_sync/spectral_gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cartan_sync/error.hpp"
#include "cartan_sync/harness.hpp"

namespace cartan_sync {
namespace {

constexpr int kMinSamples = 10000;
constexpr double kIsotropyTolerance = 1e-2;

Vector SampleTranslation(const TranslationDensity& fv, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  switch (fv.kind) {
    case TranslationDensity::Kind::kPointMass:
      return Vector::Zero(d);
    case TranslationDensity::Kind::kGaussian:
      for (;;) {
        Vector x(d);
        for (int k = 0; k < d; ++k) x(k) = fv.scale * z(rng);
        if (x.norm() <= std::numbers::pi) return x;
      }
    case TranslationDensity::Kind::kUniformBall: {
      Vector x(d);
      for (int k = 0; k < d; ++k) x(k) = z(rng);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      return fv.scale * std::pow(u(rng), 1.0 / d) * x / x.norm();
    }
  }
  return Vector::Zero(d);
}

// Spectral norm of (I - x x^T)^{-1/2}: eigenvalues 1 and |1 - |x|^2|^{-1/2}.
double Jacobian(double r2) {
  const double gap = std::abs(1.0 - r2);
  return gap > 0.0 ? std::max(1.0, 1.0 / std::sqrt(gap)) : std::numeric_limits<double>::infinity();
}

}  // namespace

SpectralGapReport SpectralGapCondition(const TranslationDensity& fv, const RotationDensity& fk, int n, int samples,
                                       std::uint64_t seed) {
  if (samples < kMinSamples) throw Error(ErrorCode::kInvalidArgument, "spectral-gap estimate needs >= 1e4 samples");
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be positive");
  if (fk.d < 1 || !(fk.sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "invalid rotation density");
  if (!(fv.scale >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "invalid translation density");
  if (fv.kind == TranslationDensity::Kind::kUniformBall && fv.scale > std::numbers::pi) {
    throw Error(ErrorCode::kUnsupportedDensity, "translation density support exceeds norm pi");
  }
  const int d = fk.d;

  std::mt19937_64 rot_rng = Substream(seed, 11);
  Matrix mean = Matrix::Zero(d, d);
  for (int s = 0; s < samples; ++s) {
    if (fk.sigma == 0.0) {
      mean += Matrix::Identity(d, d);
    } else {
      mean += SampleWrappedRotation(d, fk.sigma, rot_rng).matrix();
    }
  }
  mean /= samples;

  std::mt19937_64 trans_rng = Substream(seed, 12);
  double gamma = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x = SampleTranslation(fv, d, trans_rng);
    const double r2 = x.squaredNorm();
    const double j = Jacobian(r2);
    const double one_minus_cos = 1.0 - std::cos(std::sqrt(r2));
    gamma += j;
    // Diagonal average of (1 - cos|x|)/|x|^2 x x^T.
    alpha1 += one_minus_cos / d * j;
    alpha2 += one_minus_cos * j;
  }

  SpectralGapReport out;
  out.beta = mean.trace() / d;
  Matrix off = mean;
  off.diagonal().setZero();
  out.offdiag_residual = d > 1 ? off.cwiseAbs().maxCoeff() : 0.0;
  out.isotropic = out.offdiag_residual <= kIsotropyTolerance;
  out.gamma = gamma / samples;
  out.alpha1 = alpha1 / samples;
  out.alpha2 = alpha2 / samples;
  out.lhs = std::min((out.gamma - out.alpha1) * out.beta, out.gamma - out.alpha2);
  out.threshold = 1.0 / std::sqrt(static_cast<double>(n));
  out.satisfied = out.lhs > out.threshold;
  return out;
}

}  // namespace cartan_sync
