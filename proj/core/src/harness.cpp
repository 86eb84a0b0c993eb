#include "cartan_sync/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "cartan_sync/error.hpp"

namespace cartan_sync {
namespace {

constexpr int kMaxConnectivityAttempts = 100;
constexpr double kNoiseFloor = 1e-14;

enum StreamTag : std::uint64_t { kEdgeSetTag = 1, kNoiseTag = 2, kOutlierTag = 3, kOutlierPickTag = 4 };

Matrix UniformMatrix(int rows, int cols, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = u(rng);
  }
  return m;
}

Matrix NormalMatrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = z(rng);
  }
  return m;
}

Rotation ProjectedUniform(int d, bool special, std::mt19937_64& rng) {
  for (;;) {
    try {
      return ProjectToRotation(UniformMatrix(d, d, 0.0, 1.0, rng), special);
    } catch (const Error&) {
      // rank-deficient draw, try again
    }
  }
}

Rotation ProjectedNormal(int d, bool special, std::mt19937_64& rng) {
  for (;;) {
    try {
      return ProjectToRotation(NormalMatrix(d, d, rng), special);
    } catch (const Error&) {
    }
  }
}

// Skew matrix with standard normal upper-triangular coordinates, scaled by
// sigma and redrawn until its rotation angle is below pi.
Matrix WrappedSkew(int d, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  for (;;) {
    Matrix s = Matrix::Zero(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = a + 1; b < d; ++b) {
        s(a, b) = sigma * z(rng);
        s(b, a) = -s(a, b);
      }
    }
    if (SkewAngle(s) < std::numbers::pi) return s;
  }
}

GroupElement SampleNoise(const GroupSpec& group, const NoiseSpec& spec, std::mt19937_64& rng) {
  switch (group.kind) {
    case GroupKind::kSE: {
      // Translation draws come first so the rotation rejection loop does not
      // shift them when sigma changes.
      Vector a = spec.sigma_trans * NormalMatrix(group.d, 1, rng).col(0);
      Rotation r(MatExp(WrappedSkew(group.d, spec.sigma_rot, rng)), true);
      return RigidMotion(std::move(r), std::move(a));
    }
    case GroupKind::kMMG: {
      Matrix b = spec.sigma_trans * NormalMatrix(group.d, group.l, rng);
      Rotation mu(MatExp(WrappedSkew(group.d, spec.sigma_rot, rng)), false);
      Rotation eta(MatExp(WrappedSkew(group.l, spec.sigma_rot, rng)), false);
      return MMGElement(std::move(mu), std::move(eta), std::move(b));
    }
    case GroupKind::kSO:
    case GroupKind::kO:
      return Rotation(MatExp(WrappedSkew(group.d, spec.sigma_rot, rng)), group.kind == GroupKind::kSO);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown group");
}

GroupElement SampleOutlier(const GroupSpec& group, std::mt19937_64& rng) {
  switch (group.kind) {
    case GroupKind::kSE: {
      Rotation r = ProjectedNormal(group.d, true, rng);
      return RigidMotion(std::move(r), UniformMatrix(group.d, 1, 0.0, 1.0, rng).col(0));
    }
    case GroupKind::kMMG: {
      Rotation mu = ProjectedNormal(group.d, false, rng);
      Rotation eta = ProjectedNormal(group.l, false, rng);
      return MMGElement(std::move(mu), std::move(eta), UniformMatrix(group.d, group.l, 0.0, 1.0, rng));
    }
    case GroupKind::kSO:
    case GroupKind::kO:
      return ProjectedNormal(group.d, group.kind == GroupKind::kSO, rng);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown group");
}

double MeanSquared(const std::vector<GroupElement>& est, const std::vector<GroupElement>& truth,
                   const GroupElement& gauge) {
  double total = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double dist = HybridDistance(Compose(est[i], gauge), truth[i]);
    total += dist * dist;
  }
  return total / static_cast<double>(est.size());
}

void RequireComparable(const std::vector<GroupElement>& est, const std::vector<GroupElement>& truth) {
  if (est.empty() || est.size() != truth.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "estimate and truth lists differ in length");
  }
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est[i].index() != truth[i].index()) {
      throw Error(ErrorCode::kDimensionMismatch, "estimate and truth use different groups");
    }
  }
}

Rotation BestRotation(const Matrix& x, bool special) {
  // Maximizer of tr(R^T X) over O(d) or SO(d).
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  if (special && (u * v.transpose()).determinant() < 0.0) u.col(u.cols() - 1) *= -1.0;
  return ProjectToRotation(u * v.transpose(), special);
}

}  // namespace

void NoiseSpec::Validate() const {
  if (!(sigma_rot >= 0.0) || !(sigma_trans >= 0.0) || !std::isfinite(sigma_rot) || !std::isfinite(sigma_trans)) {
    throw Error(ErrorCode::kInvalidArgument, "noise sigmas must be finite and nonnegative");
  }
  if (!(outlier_rate >= 0.0 && outlier_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "outlier_rate must lie in [0, 1)");
  }
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "p must lie in (0, 1]");
}

bool NoiseSpec::PlausiblyConnected(int n) const {
  return p * 0.5 * n * (n - 1.0) >= n - 1.0;
}

std::mt19937_64 Substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

std::vector<GroupElement> SampleGroundTruth(int n, const GroupSpec& group, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "ground truth needs n >= 2");
  std::mt19937_64 rng(seed);
  std::vector<GroupElement> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    switch (group.kind) {
      case GroupKind::kSE: {
        Rotation mu = ProjectedUniform(group.d, true, rng);
        out.push_back(RigidMotion(std::move(mu), UniformMatrix(group.d, 1, 0.0, 2.0, rng).col(0)));
        break;
      }
      case GroupKind::kMMG: {
        Rotation mu = ProjectedUniform(group.d, false, rng);
        Rotation eta = ProjectedUniform(group.l, false, rng);
        out.push_back(MMGElement(std::move(mu), std::move(eta), UniformMatrix(group.d, group.l, 0.0, 1.0, rng)));
        break;
      }
      case GroupKind::kSO:
      case GroupKind::kO:
        out.push_back(ProjectedUniform(group.d, group.kind == GroupKind::kSO, rng));
        break;
    }
  }
  return out;
}

Rotation SampleWrappedRotation(int d, double sigma, std::mt19937_64& rng, bool special) {
  return Rotation(MatExp(WrappedSkew(d, sigma, rng)), special);
}

MeasurementSet MakeMeasurements(const std::vector<GroupElement>& truth, const GroupSpec& group,
                                const NoiseSpec& spec) {
  spec.Validate();
  const int n = static_cast<int>(truth.size());
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two ground-truth elements");
  for (const GroupElement& g : truth) CheckElement(group, g);

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  const auto m = static_cast<std::size_t>(std::llround(spec.p * static_cast<double>(pairs.size())));

  std::vector<std::pair<int, int>> chosen;
  bool connected = false;
  for (int attempt = 0; attempt < kMaxConnectivityAttempts && !connected; ++attempt) {
    chosen.clear();
    std::mt19937_64 rng = Substream(spec.seed, kEdgeSetTag, attempt);
    std::sample(pairs.begin(), pairs.end(), std::back_inserter(chosen), m, rng);
    std::vector<Edge> probe;
    probe.reserve(chosen.size());
    for (const auto& [i, j] : chosen) probe.push_back({i, j, 1.0, Rotation::Identity(1)});
    connected = IsConnected(n, probe);
  }
  if (!connected) {
    throw Error(ErrorCode::kConnectivityFailure,
                "no connected edge sample after " + std::to_string(kMaxConnectivityAttempts) + " attempts");
  }

  const std::size_t outliers = static_cast<std::size_t>(std::llround(spec.outlier_rate * static_cast<double>(m)));
  std::vector<char> is_outlier(chosen.size(), 0);
  {
    std::vector<std::size_t> idx(chosen.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::size_t> picked;
    std::mt19937_64 rng = Substream(spec.seed, kOutlierPickTag);
    std::sample(idx.begin(), idx.end(), std::back_inserter(picked), outliers, rng);
    for (std::size_t k : picked) is_outlier[k] = 1;
  }

  const bool noisy = spec.sigma_rot > 0.0 || spec.sigma_trans > 0.0;
  std::vector<Edge> edges;
  std::vector<GroupElement> noise;
  std::vector<GroupElement> inlier_clean;
  std::vector<GroupElement> inlier_noise;
  edges.reserve(chosen.size());
  noise.reserve(chosen.size());
  const GroupElement identity = IdentityElement(group);
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const auto [i, j] = chosen[k];
    const GroupElement clean = Compose(truth[i], Inverse(truth[j]));
    if (is_outlier[k]) {
      std::mt19937_64 rng = Substream(spec.seed, kOutlierTag, k);
      edges.push_back({i, j, 1.0, SampleOutlier(group, rng)});
      noise.push_back(identity);
      continue;
    }
    GroupElement nij = identity;
    if (noisy) {
      std::mt19937_64 rng = Substream(spec.seed, kNoiseTag, k);
      nij = SampleNoise(group, spec, rng);
    }
    edges.push_back({i, j, 1.0, Compose(Compose(truth[i], nij), Inverse(truth[j]))});
    if (noisy) {
      inlier_clean.push_back(clean);
      inlier_noise.push_back(nij);
    }
    noise.push_back(std::move(nij));
  }

  MeasurementSet out{MeasurementGraph(group, n, std::move(edges)), std::numeric_limits<double>::infinity(), 0,
                     std::move(is_outlier), std::move(noise)};
  if (noisy) out.snr_db = SnrDb(inlier_clean, inlier_noise, &out.snr_excluded);
  return out;
}

double LogNorm(const GroupElement& g) {
  if (const auto* se = std::get_if<RigidMotion>(&g)) return SeLog(*se).norm();
  if (const auto* mmg = std::get_if<MMGElement>(&g)) {
    return HybridDistance(*mmg, MMGElement::Identity(mmg->d(), mmg->l()));
  }
  const auto& r = std::get<Rotation>(g);
  if (r.special()) return OrthLog(r.matrix()).norm();
  return (r.matrix() - Matrix::Identity(r.dim(), r.dim())).norm();
}

double SnrDb(const std::vector<GroupElement>& clean_ratios, const std::vector<GroupElement>& noise, int* excluded) {
  if (clean_ratios.size() != noise.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "clean ratio and noise lists differ in length");
  }
  double total = 0.0;
  int used = 0;
  int skipped = 0;
  for (std::size_t k = 0; k < noise.size(); ++k) {
    const double nn = LogNorm(noise[k]);
    const double sn = LogNorm(clean_ratios[k]);
    if (nn < kNoiseFloor || sn < kNoiseFloor) {
      ++skipped;
      continue;
    }
    total += std::log10(sn / nn);
    ++used;
  }
  if (excluded != nullptr) *excluded = skipped;
  if (used == 0) throw Error(ErrorCode::kAllNoiseFree, "every edge is noise free");
  return 20.0 * total / used;
}

Calibration CalibrateNoise(const std::vector<GroupElement>& truth, const GroupSpec& group, const NoiseSpec& base,
                           double target_db, double trans_ratio, double tolerance_db) {
  if (!(trans_ratio >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "trans_ratio must be nonnegative");
  auto measure = [&](double s) {
    NoiseSpec spec = base;
    spec.sigma_rot = s;
    spec.sigma_trans = trans_ratio * s;
    return std::make_pair(spec, MakeMeasurements(truth, group, spec).snr_db);
  };
  // SNR decreases with the scale; bisect in log-space.
  double lo = std::log(1e-8);
  double hi = std::log(4.0);
  Calibration best{base, 0.0, 0};
  double best_gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto [spec, snr] = measure(std::exp(mid));
    ++best.iterations;
    const double gap = std::abs(snr - target_db);
    if (gap < best_gap) {
      best_gap = gap;
      best.spec = spec;
      best.snr_db = snr;
    }
    if (gap <= tolerance_db) break;
    if (snr > target_db) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

GroupElement OptimalGauge(const std::vector<GroupElement>& estimates, const std::vector<GroupElement>& truth) {
  RequireComparable(estimates, truth);
  const double n = static_cast<double>(estimates.size());
  if (std::holds_alternative<RigidMotion>(estimates.front())) {
    const int d = std::get<RigidMotion>(estimates.front()).dim();
    Matrix x = Matrix::Zero(d, d);
    Vector b = Vector::Zero(d);
    for (std::size_t i = 0; i < estimates.size(); ++i) {
      const auto& e = std::get<RigidMotion>(estimates[i]);
      const auto& t = std::get<RigidMotion>(truth[i]);
      x += e.mu.matrix().transpose() * t.mu.matrix();
      b += e.mu.matrix().transpose() * (t.b - e.b);
    }
    return RigidMotion(BestRotation(x, true), b / n);
  }
  if (std::holds_alternative<MMGElement>(estimates.front())) {
    const auto& first = std::get<MMGElement>(estimates.front());
    const int d = first.d();
    const int l = first.l();
    Matrix x = Matrix::Zero(d, d);
    Matrix y = Matrix::Zero(l, l);
    Matrix b = Matrix::Zero(d, l);
    for (std::size_t i = 0; i < estimates.size(); ++i) {
      const auto& e = std::get<MMGElement>(estimates[i]);
      const auto& t = std::get<MMGElement>(truth[i]);
      x += e.mu.matrix().transpose() * t.mu.matrix();
      y += e.eta.matrix().transpose() * t.eta.matrix();
      b += e.mu.matrix().transpose() * (t.B - e.B) * e.eta.matrix();
    }
    return MMGElement(BestRotation(x, false), BestRotation(y, false), b / n);
  }
  const auto& first = std::get<Rotation>(estimates.front());
  Matrix x = Matrix::Zero(first.dim(), first.dim());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    x += std::get<Rotation>(estimates[i]).matrix().transpose() * std::get<Rotation>(truth[i]).matrix();
  }
  return BestRotation(x, first.special());
}

double GaugeObjective(const std::vector<GroupElement>& estimates, const std::vector<GroupElement>& truth,
                      const GroupElement& gauge) {
  RequireComparable(estimates, truth);
  return MeanSquared(estimates, truth, gauge);
}

double Mse(const std::vector<GroupElement>& estimates, const std::vector<GroupElement>& truth) {
  return GaugeObjective(estimates, truth, OptimalGauge(estimates, truth));
}

}  // namespace cartan_sync
