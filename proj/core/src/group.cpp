#include "cartan_sync/group.hpp"

#include <cmath>
#include <sstream>

#include "cartan_sync/error.hpp"

namespace cartan_sync {
namespace {

void RequireSameDim(int a, int b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

std::string_view GroupKindName(GroupKind kind) {
  switch (kind) {
    case GroupKind::kSE: return "SE";
    case GroupKind::kMMG: return "MMG";
    case GroupKind::kSO: return "SO";
    case GroupKind::kO: return "O";
  }
  return "?";
}

GroupKind ParseGroupKind(std::string_view name) {
  if (name == "SE") return GroupKind::kSE;
  if (name == "MMG") return GroupKind::kMMG;
  if (name == "SO") return GroupKind::kSO;
  if (name == "O") return GroupKind::kO;
  throw Error(ErrorCode::kConfigInvalid, "unknown group kind '" + std::string(name) + "'");
}

int GroupSpec::CompactOrder() const {
  switch (kind) {
    case GroupKind::kSE: return d + 1;
    case GroupKind::kMMG: return d + l;
    default: return d;
  }
}

int GroupSpec::TangentDim() const {
  switch (kind) {
    case GroupKind::kSE: return d;
    case GroupKind::kMMG: return d * l;
    default: return 0;
  }
}

std::string GroupSpec::ToString() const {
  std::ostringstream os;
  os << GroupKindName(kind) << "(" << d;
  if (kind == GroupKind::kMMG) os << "," << l;
  os << ")";
  return os.str();
}

Rotation::Rotation(Matrix entries, bool special) : entries_(std::move(entries)), special_(special) {
  if (entries_.rows() != entries_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "rotation must be square");
  }
  const auto n = entries_.rows();
  const double defect = (entries_.transpose() * entries_ - Matrix::Identity(n, n)).norm();
  if (!(defect <= kTolerance)) {
    throw Error(ErrorCode::kInvalidArgument,
                "matrix is not orthogonal (defect " + std::to_string(defect) + ")");
  }
  if (special_ && n > 0 && entries_.determinant() <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "special rotation with non-positive determinant");
  }
}

Rotation Rotation::Identity(int d, bool special) { return Rotation(Matrix::Identity(d, d), special); }

Rotation Rotation::Transpose() const { return Rotation(entries_.transpose(), special_); }

Rotation Rotation::operator*(const Rotation& other) const {
  RequireSameDim(dim(), other.dim(), "rotation product");
  return Rotation(entries_ * other.entries_, special_ && other.special_);
}

RigidMotion::RigidMotion(Rotation mu_in, Vector b_in) : mu(std::move(mu_in)), b(std::move(b_in)) {
  RequireSameDim(mu.dim(), static_cast<int>(b.size()), "rigid motion translation");
}

RigidMotion RigidMotion::Identity(int d) { return {Rotation::Identity(d, true), Vector::Zero(d)}; }

Matrix RigidMotion::Homogeneous() const {
  const int d = dim();
  Matrix out = Matrix::Identity(d + 1, d + 1);
  out.topLeftCorner(d, d) = mu.matrix();
  out.topRightCorner(d, 1) = b;
  return out;
}

MMGElement::MMGElement(Rotation mu_in, Rotation eta_in, Matrix B_in)
    : mu(std::move(mu_in)), eta(std::move(eta_in)), B(std::move(B_in)) {
  RequireSameDim(static_cast<int>(B.rows()), mu.dim(), "MMG rows of B");
  RequireSameDim(static_cast<int>(B.cols()), eta.dim(), "MMG cols of B");
}

MMGElement MMGElement::Identity(int d, int l) {
  return {Rotation::Identity(d, false), Rotation::Identity(l, false), Matrix::Zero(d, l)};
}

TangentP TangentP::SE(const Vector& b) { return {GroupKind::kSE, Matrix(b)}; }
TangentP TangentP::MMG(const Matrix& B) { return {GroupKind::kMMG, B}; }

TangentP TangentP::Zero(const GroupSpec& spec) {
  if (spec.kind == GroupKind::kSE) return SE(Vector::Zero(spec.d));
  if (spec.kind == GroupKind::kMMG) return MMG(Matrix::Zero(spec.d, spec.l));
  throw Error(ErrorCode::kInvalidArgument, "compact groups have no p-part");
}

Vector TangentP::AsVector() const { return Eigen::Map<const Vector>(value.data(), value.size()); }

Matrix SkewEmbed(const TangentP& t) {
  const auto d = t.value.rows();
  const auto l = t.value.cols();
  Matrix s = Matrix::Zero(d + l, d + l);
  s.topRightCorner(d, l) = t.value;
  s.bottomLeftCorner(l, d) = -t.value.transpose();
  return s;
}

Rotation RodriguesExp(const TangentP& t) {
  if (t.kind != GroupKind::kSE || t.value.cols() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "Rodrigues formula needs an SE tangent vector");
  }
  const auto n = t.value.rows() + 1;
  const double theta = t.value.norm();
  if (theta == 0.0) return Rotation::Identity(static_cast<int>(n), true);
  const Matrix p = SkewEmbed(t) / theta;
  Matrix r = Matrix::Identity(n, n) + std::sin(theta) * p + (1.0 - std::cos(theta)) * (p * p);
  return Rotation(std::move(r), true);
}

Matrix SeLog(const RigidMotion& g) { return MatLog(g.Homogeneous()); }

Rotation ProjectToRotation(const Matrix& a, bool special) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::kDimensionMismatch, "projection needs a square matrix");
  const auto n = a.rows();
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  if (n > 0 && !(sv(n - 1) > 1e-12 * sv(0))) {
    throw Error(ErrorCode::kRankDeficient, "matrix is numerically rank deficient");
  }
  Matrix u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  if (special && (u * v.transpose()).determinant() < 0.0) u.col(n - 1) *= -1.0;
  Matrix r = u * v.transpose();
  return Rotation(std::move(r), special);
}

RigidMotion Compose(const RigidMotion& g1, const RigidMotion& g2) {
  RequireSameDim(g1.dim(), g2.dim(), "SE compose");
  return {g1.mu * g2.mu, g1.b + g1.mu.matrix() * g2.b};
}

RigidMotion Inverse(const RigidMotion& g) {
  Rotation mu_t = g.mu.Transpose();
  Vector b = -(mu_t.matrix() * g.b);
  return {std::move(mu_t), std::move(b)};
}

MMGElement Compose(const MMGElement& g1, const MMGElement& g2) {
  RequireSameDim(g1.d(), g2.d(), "MMG compose (d)");
  RequireSameDim(g1.l(), g2.l(), "MMG compose (l)");
  return {g1.mu * g2.mu, g1.eta * g2.eta,
          g1.mu.matrix() * g2.B * g1.eta.matrix().transpose() + g1.B};
}

MMGElement Inverse(const MMGElement& g) {
  Matrix B = -(g.mu.matrix().transpose() * g.B * g.eta.matrix());
  return {g.mu.Transpose(), g.eta.Transpose(), std::move(B)};
}

Rotation Compose(const Rotation& g1, const Rotation& g2) { return g1 * g2; }
Rotation Inverse(const Rotation& g) { return g.Transpose(); }

GroupElement Compose(const GroupElement& g1, const GroupElement& g2) {
  return std::visit(
      [](const auto& a, const auto& b) -> GroupElement {
        using A = std::decay_t<decltype(a)>;
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<A, B>) {
          return Compose(a, b);
        } else {
          throw Error(ErrorCode::kDimensionMismatch, "compose across different groups");
        }
      },
      g1, g2);
}

GroupElement Inverse(const GroupElement& g) {
  return std::visit([](const auto& a) -> GroupElement { return Inverse(a); }, g);
}

double HybridDistance(const RigidMotion& g1, const RigidMotion& g2) {
  RequireSameDim(g1.dim(), g2.dim(), "SE distance");
  const double k = (g1.mu.matrix() - g2.mu.matrix()).squaredNorm();
  const double v = (g1.b - g2.b).squaredNorm();
  return std::sqrt(k + v);
}

double HybridDistance(const MMGElement& g1, const MMGElement& g2) {
  RequireSameDim(g1.d(), g2.d(), "MMG distance (d)");
  RequireSameDim(g1.l(), g2.l(), "MMG distance (l)");
  const double k = (g1.mu.matrix() - g2.mu.matrix()).squaredNorm() +
                   (g1.eta.matrix() - g2.eta.matrix()).squaredNorm();
  const double v = (g1.B - g2.B).squaredNorm();
  return std::sqrt(k + v);
}

double HybridDistance(const Rotation& g1, const Rotation& g2) {
  RequireSameDim(g1.dim(), g2.dim(), "rotation distance");
  return (g1.matrix() - g2.matrix()).norm();
}

double HybridDistance(const GroupElement& g1, const GroupElement& g2) {
  return std::visit(
      [](const auto& a, const auto& b) -> double {
        using A = std::decay_t<decltype(a)>;
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<A, B>) {
          return HybridDistance(a, b);
        } else {
          throw Error(ErrorCode::kDimensionMismatch, "distance across different groups");
        }
      },
      g1, g2);
}

GroupElement IdentityElement(const GroupSpec& spec) {
  switch (spec.kind) {
    case GroupKind::kSE: return RigidMotion::Identity(spec.d);
    case GroupKind::kMMG: return MMGElement::Identity(spec.d, spec.l);
    case GroupKind::kSO: return Rotation::Identity(spec.d, true);
    case GroupKind::kO: return Rotation::Identity(spec.d, false);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown group");
}

void CheckElement(const GroupSpec& spec, const GroupElement& g) {
  const bool ok = std::visit(
      [&](const auto& e) -> bool {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, RigidMotion>) {
          return spec.kind == GroupKind::kSE && e.dim() == spec.d;
        } else if constexpr (std::is_same_v<E, MMGElement>) {
          return spec.kind == GroupKind::kMMG && e.d() == spec.d && e.l() == spec.l;
        } else {
          if (spec.kind == GroupKind::kSO) return e.dim() == spec.d && e.special();
          return spec.kind == GroupKind::kO && e.dim() == spec.d;
        }
      },
      g);
  if (!ok) throw Error(ErrorCode::kDimensionMismatch, "element does not belong to " + spec.ToString());
}

double LinearPartNorm(const GroupElement& g) {
  if (const auto* se = std::get_if<RigidMotion>(&g)) return se->b.norm();
  if (const auto* mmg = std::get_if<MMGElement>(&g)) return mmg->B.norm();
  return 0.0;
}

}  // namespace cartan_sync
