#pragma once

#include <optional>

#include "cartan_sync/group.hpp"

namespace cartan_sync {

/// Radius constant of the approximated-homomorphism guarantee for the group
/// contraction: ||v1|| + ||v2|| <= kHomomorphismRadius * lambda.
inline constexpr double kHomomorphismRadius = 0.59;

enum class MapKind {
  kPsi,  // group contraction exp(v / lambda) k
  kPhi,  // orthogonal polar factor of the lambda-scaled homogeneous matrix (SE only)
};

/// Image of a Cartan motion group element in the compact group.
struct CompactImage {
  Rotation Q;
  double lambda;
  GroupSpec source;

  CompactImage(Rotation q, double lambda, GroupSpec source);
};

/// Group-level Cartan decomposition Q = exp(SkewEmbed(p)) * k.
/// For SE(d), `k` is the d x d rotation block; for MMG(d, l) it is the
/// (d+l) x (d+l) block-diagonal matrix diag(mu, eta).
struct CartanFactors {
  TangentP p;
  Rotation k;
  int iterations = 0;
  double objective = 0.0;
};

CompactImage Psi(const RigidMotion& g, double lambda);
CompactImage Psi(const MMGElement& g, double lambda);
CompactImage Psi(const GroupElement& g, double lambda);

/// Closed-form decomposition of Q in SO(d+1) (last-column Rodrigues inversion).
CartanFactors CartanDecomposeSO(const Rotation& q);

struct CartanOptOptions {
  double tolerance = 1e-28;         // stop once the masked objective is below this
  double failure_threshold = 1e-10; // NoConvergence if still above this at the cap
  int max_iterations = 200;
  std::optional<Matrix> initial;    // starting p (d x l); zero when absent
};

/// Decomposition of Q in O(d+l) by minimising ||U1 exp(-p) Q U2||_F^2 over
/// p in M(d, l), where the masks pick the off-diagonal d x l block.
CartanFactors CartanDecomposeOpt(const Rotation& q, int d, int l,
                                 const CartanOptOptions& options = {});

/// Masked objective and its exact gradient with respect to p.
double CartanOptObjective(const Matrix& q, const Matrix& p, Matrix* gradient = nullptr);

RigidMotion PsiInverseSE(const CompactImage& c);
MMGElement PsiInverseMMG(const CompactImage& c, const CartanOptOptions& options = {});
GroupElement PsiInverse(const CompactImage& c);

CompactImage Phi(const RigidMotion& g, double lambda);
RigidMotion PhiInverse(const CompactImage& c);

/// Frobenius defect ||F(g1 g2) - F(g1) F(g2)|| of the selected map.
double HomomorphismResidual(const GroupElement& g1, const GroupElement& g2, double lambda,
                            MapKind map);

/// Dispatch helpers used by the synchronization pipeline.
CompactImage ForwardMap(const GroupElement& g, double lambda, MapKind map);
GroupElement BackMap(const CompactImage& c, MapKind map);

}  // namespace cartan_sync
