#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "cartan_sync/matrix_functions.hpp"

namespace cartan_sync {

enum class GroupKind { kSE, kMMG, kSO, kO };

std::string_view GroupKindName(GroupKind kind);
GroupKind ParseGroupKind(std::string_view name);

// Which group and at what size. `l` is only meaningful for MMG(d, l).
struct GroupSpec {
  GroupKind kind = GroupKind::kSE;
  int d = 3;
  int l = 0;

  static GroupSpec SE(int d) { return {GroupKind::kSE, d, 0}; }
  static GroupSpec MMG(int d, int l) { return {GroupKind::kMMG, d, l}; }
  static GroupSpec SO(int d) { return {GroupKind::kSO, d, 0}; }
  static GroupSpec O(int d) { return {GroupKind::kO, d, 0}; }

  /// Order of the orthogonal matrices of the associated compact group.
  int CompactOrder() const;
  /// Dimension of the linear part (d for SE, d*l for MMG, 0 otherwise).
  int TangentDim() const;
  std::string ToString() const;

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

/// Orthogonal matrix, optionally restricted to det = +1. Validated on
/// construction (||R^T R - I||_F <= 1e-10).
class Rotation {
 public:
  static constexpr double kTolerance = 1e-10;

  Rotation(Matrix entries, bool special);

  static Rotation Identity(int d, bool special = true);

  const Matrix& matrix() const { return entries_; }
  bool special() const { return special_; }
  int dim() const { return static_cast<int>(entries_.rows()); }

  Rotation Transpose() const;
  Rotation operator*(const Rotation& other) const;

 private:
  Matrix entries_;
  bool special_;
};

/// Element (mu, b) of SE(d).
struct RigidMotion {
  Rotation mu;
  Vector b;

  RigidMotion(Rotation mu, Vector b);
  static RigidMotion Identity(int d);

  int dim() const { return mu.dim(); }
  /// Homogeneous (d+1)x(d+1) representation [mu b; 0 1].
  Matrix Homogeneous() const;
};

/// Element (mu, eta, B) of the matrix motion group MMG(d, l).
struct MMGElement {
  Rotation mu;
  Rotation eta;
  Matrix B;

  MMGElement(Rotation mu, Rotation eta, Matrix B);
  static MMGElement Identity(int d, int l);

  int d() const { return mu.dim(); }
  int l() const { return eta.dim(); }
};

using GroupElement = std::variant<Rotation, RigidMotion, MMGElement>;

/// Element of the p-part of the Cartan decomposition: a d-vector (stored as a
/// d x 1 matrix) for SE, a d x l matrix for MMG.
struct TangentP {
  GroupKind kind = GroupKind::kSE;
  Matrix value;

  static TangentP SE(const Vector& b);
  static TangentP MMG(const Matrix& B);
  static TangentP Zero(const GroupSpec& spec);

  int rows() const { return static_cast<int>(value.rows()); }
  int cols() const { return static_cast<int>(value.cols()); }
  double Norm() const { return value.norm(); }
  Vector AsVector() const;
};

/// [[0, B], [-B^T, 0]] of order rows + cols.
Matrix SkewEmbed(const TangentP& t);

/// exp(SkewEmbed(t)) for the SE kind via the closed rank-two formula.
Rotation RodriguesExp(const TangentP& t);

/// Principal logarithm of the homogeneous matrix of g.
Matrix SeLog(const RigidMotion& g);

/// Nearest (special) orthogonal matrix in the Frobenius norm.
Rotation ProjectToRotation(const Matrix& a, bool special);

RigidMotion Compose(const RigidMotion& g1, const RigidMotion& g2);
RigidMotion Inverse(const RigidMotion& g);
MMGElement Compose(const MMGElement& g1, const MMGElement& g2);
MMGElement Inverse(const MMGElement& g);
Rotation Compose(const Rotation& g1, const Rotation& g2);
Rotation Inverse(const Rotation& g);
GroupElement Compose(const GroupElement& g1, const GroupElement& g2);
GroupElement Inverse(const GroupElement& g);

double HybridDistance(const RigidMotion& g1, const RigidMotion& g2);
double HybridDistance(const MMGElement& g1, const MMGElement& g2);
double HybridDistance(const Rotation& g1, const Rotation& g2);
double HybridDistance(const GroupElement& g1, const GroupElement& g2);

GroupElement IdentityElement(const GroupSpec& spec);
/// Throws DimensionMismatch if `g` is not an element of `spec`.
void CheckElement(const GroupSpec& spec, const GroupElement& g);
/// Norm of the linear (p) part; zero for the compact groups.
double LinearPartNorm(const GroupElement& g);

}  // namespace cartan_sync
