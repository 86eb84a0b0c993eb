#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cartan_sync/measurement_graph.hpp"

namespace cartan_sync {

/// Parameters of the multiplicative measurement model g_ij = g_i N_ij g_j^{-1}.
struct NoiseSpec {
  double sigma_rot = 0.0;     // std-dev per coordinate of the compact-part algebra
  double sigma_trans = 0.0;   // std-dev per coordinate of the linear part
  double outlier_rate = 0.0;  // in [0, 1)
  double p = 1.0;             // fraction of the n(n-1)/2 pairs kept, in (0, 1]
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on out-of-range fields.
  void Validate() const;
  /// p * C(n, 2) >= n - 1: enough edges to possibly be connected.
  bool PlausiblyConnected(int n) const;
};

/// One row of an experiment sweep.
struct TrialRecord {
  std::string method;
  GroupSpec group;
  int n = 0;
  double p = 1.0;
  double snr_db = 0.0;
  double outlier_rate = 0.0;
  double lambda = 0.0;  // 0 when the method has no lambda
  int trial = 0;
  std::uint64_t seed = 0;
  double mse = 0.0;
  double runtime_ms = 0.0;
  std::string error;  // empty on success
};

/// Independent generator for (seed, a, b); used to give every edge and every
/// trial its own stream.
std::mt19937_64 Substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Random ground truth: projected uniform[0,1] matrices for the compact
/// parts, uniform[0,2] translations (SE) or uniform[0,1] B entries (MMG).
std::vector<GroupElement> SampleGroundTruth(int n, const GroupSpec& group, std::uint64_t seed);

/// exp(S) with S having i.i.d. N(0, sigma^2) upper-triangular coordinates,
/// redrawn until the rotation angle is below pi.
Rotation SampleWrappedRotation(int d, double sigma, std::mt19937_64& rng, bool special = true);

struct MeasurementSet {
  MeasurementGraph graph;
  double snr_db = 0.0;              // +inf for noise-free data
  int snr_excluded = 0;             // edges skipped by the SNR average
  std::vector<char> outlier;        // per edge of graph.edges()
  std::vector<GroupElement> noise;  // N_ij per edge (identity for outliers)
};

/// Samples the edge set (rejecting disconnected draws, at most 100 times),
/// applies noise and outliers, and reports the realized SNR over inlier edges.
MeasurementSet MakeMeasurements(const std::vector<GroupElement>& truth, const GroupSpec& group,
                                const NoiseSpec& spec);

/// Average decibel ratio of clean-ratio log-norms to noise log-norms. For MMG
/// the hybrid distance to the identity is used as the norm.
double SnrDb(const std::vector<GroupElement>& clean_ratios, const std::vector<GroupElement>& noise,
             int* excluded = nullptr);

/// Norm of the logarithm of g used by SnrDb.
double LogNorm(const GroupElement& g);

struct Calibration {
  NoiseSpec spec;
  double snr_db = 0.0;
  int iterations = 0;
};

/// Bisection on a common scale s with sigma_rot = s and
/// sigma_trans = trans_ratio * s until the realized SNR matches the target.
Calibration CalibrateNoise(const std::vector<GroupElement>& truth, const GroupSpec& group, const NoiseSpec& base,
                           double target_db, double trans_ratio = 1.0, double tolerance_db = 0.05);

/// Closed-form minimizer g of sum_i d_H(est_i g, truth_i)^2.
GroupElement OptimalGauge(const std::vector<GroupElement>& estimates, const std::vector<GroupElement>& truth);

/// (1/n) sum_i d_H(est_i g, truth_i)^2 for a given gauge g.
double GaugeObjective(const std::vector<GroupElement>& estimates, const std::vector<GroupElement>& truth,
                      const GroupElement& gauge);

/// Mean squared hybrid distance after the optimal gauge.
double Mse(const std::vector<GroupElement>& estimates, const std::vector<GroupElement>& truth);

}  // namespace cartan_sync
