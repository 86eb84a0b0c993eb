#pragma once

#include <cstdint>

namespace cartan_sync {

/// Density of the translational noise, in contracted units (a / lambda).
struct TranslationDensity {
  enum class Kind { kPointMass, kGaussian, kUniformBall };
  Kind kind = Kind::kPointMass;
  double scale = 0.0;  // sigma for kGaussian (truncated at pi), radius for kUniformBall
};

/// Density of the rotational noise: wrapped Gaussian with per-coordinate
/// sigma (sigma = 0 is the point mass at the identity).
struct RotationDensity {
  int d = 3;
  double sigma = 0.0;
};

struct SpectralGapReport {
  double beta = 0.0;
  double gamma = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double offdiag_residual = 0.0;  // max |off-diagonal| of the sampled E[upsilon]
  bool isotropic = true;          // offdiag_residual <= 1e-2
  double lhs = 0.0;               // min{(gamma - alpha1) beta, gamma - alpha2}
  double threshold = 0.0;         // 1 / sqrt(n)
  bool satisfied = false;
};

/// Monte-Carlo estimate of the spectral-gap condition for SE(d) noise.
/// Requires samples >= 1e4; throws UnsupportedDensity when the translation
/// density reaches beyond norm pi.
SpectralGapReport SpectralGapCondition(const TranslationDensity& fv, const RotationDensity& fk, int n,
                                       int samples, std::uint64_t seed = 0);

}  // namespace cartan_sync
