#include "cartan_sync/contraction.hpp"

#include <cmath>
#include <numbers>

#include "cartan_sync/error.hpp"

namespace cartan_sync {
namespace {

Matrix EmbedBlock(const Matrix& mu, int order) {
  Matrix out = Matrix::Identity(order, order);
  out.topLeftCorner(mu.rows(), mu.cols()) = mu;
  return out;
}

Matrix BlockDiag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

void RequireLambda(double lambda) {
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be finite and >= 1");
  }
}

const RigidMotion& AsSE(const GroupElement& g) {
  if (const auto* se = std::get_if<RigidMotion>(&g)) return *se;
  throw Error(ErrorCode::kInvalidArgument, "expected an SE(d) element");
}

}  // namespace

CompactImage::CompactImage(Rotation q, double lambda_in, GroupSpec source_in)
    : Q(std::move(q)), lambda(lambda_in), source(source_in) {
  RequireLambda(lambda);
  if (Q.dim() != source.CompactOrder()) {
    throw Error(ErrorCode::kDimensionMismatch, "compact image has the wrong order");
  }
}

CompactImage Psi(const RigidMotion& g, double lambda) {
  RequireLambda(lambda);
  const int d = g.dim();
  const Rotation p = RodriguesExp(TangentP::SE(g.b / lambda));
  Matrix q = p.matrix() * EmbedBlock(g.mu.matrix(), d + 1);
  return {Rotation(std::move(q), true), lambda, GroupSpec::SE(d)};
}

CompactImage Psi(const MMGElement& g, double lambda) {
  RequireLambda(lambda);
  const Matrix p = MatExp(SkewEmbed(TangentP::MMG(g.B / lambda)));
  Matrix q = p * BlockDiag(g.mu.matrix(), g.eta.matrix());
  return {Rotation(std::move(q), false), lambda, GroupSpec::MMG(g.d(), g.l())};
}

CompactImage Psi(const GroupElement& g, double lambda) {
  if (const auto* se = std::get_if<RigidMotion>(&g)) return Psi(*se, lambda);
  if (const auto* mmg = std::get_if<MMGElement>(&g)) return Psi(*mmg, lambda);
  throw Error(ErrorCode::kInvalidArgument, "contraction is defined for SE and MMG only");
}

CartanFactors CartanDecomposeSO(const Rotation& q) {
  const int d = q.dim() - 1;
  const Matrix& m = q.matrix();
  const Vector column = m.col(d).head(d);
  // atan2 form of arccos(Q(d+1, d+1)); identical angle, better conditioned.
  const double theta = std::atan2(column.norm(), m(d, d));
  if (std::numbers::pi - theta < 1e-9) {
    throw Error(ErrorCode::kBoundaryOfInjectivity, "theta reached pi; decomposition is not unique");
  }
  Vector b = Vector::Zero(d);
  if (theta >= 1e-12) b = (theta / std::sin(theta)) * column;
  TangentP p = TangentP::SE(b);
  const Matrix k_full = RodriguesExp(p).matrix().transpose() * m;
  Rotation k = ProjectToRotation(k_full.topLeftCorner(d, d), q.special());
  return {std::move(p), std::move(k), 0, 0.0};
}

double CartanOptObjective(const Matrix& q, const Matrix& p, Matrix* gradient) {
  const auto d = p.rows();
  const auto l = p.cols();
  const Matrix s = SkewEmbed(TangentP::MMG(p));
  const Matrix x = MatExp(-s) * q;
  const Matrix f = x.topRightCorner(d, l);
  if (gradient != nullptr) {
    Matrix e = Matrix::Zero(d + l, d + l);
    e.topRightCorner(d, l) = f;
    const Matrix g = ExpFrechet(s, e * q.transpose());
    *gradient = -2.0 * (g.topRightCorner(d, l) - g.bottomLeftCorner(l, d).transpose());
  }
  return f.squaredNorm();
}

CartanFactors CartanDecomposeOpt(const Rotation& q, int d, int l, const CartanOptOptions& options) {
  if (q.dim() != d + l) throw Error(ErrorCode::kDimensionMismatch, "Q must have order d + l");
  const Matrix& qm = q.matrix();
  Matrix p = options.initial.value_or(Matrix::Zero(d, l));
  if (p.rows() != d || p.cols() != l) {
    throw Error(ErrorCode::kDimensionMismatch, "initial guess has the wrong shape");
  }

  Matrix grad;
  double f = CartanOptObjective(qm, p, &grad);
  int it = 0;
  constexpr double kArmijo = 1e-4;
  while (f > options.tolerance && it < options.max_iterations) {
    const double g2 = grad.squaredNorm();
    if (g2 == 0.0) break;
    // The Hessian is close to 2I near the optimum, so 1/2 is the Newton-like step.
    double step = 0.5;
    Matrix trial;
    double f_trial = 0.0;
    Matrix grad_trial;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = p - step * grad;
      f_trial = CartanOptObjective(qm, trial, nullptr);
      if (f_trial <= f - kArmijo * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++it;
    if (!accepted) break;
    p = std::move(trial);
    f = CartanOptObjective(qm, p, &grad);
  }
  if (f > options.failure_threshold) {
    throw Error(ErrorCode::kNoConvergence,
                "Cartan decomposition objective " + std::to_string(f) + " after " +
                    std::to_string(it) + " iterations");
  }

  TangentP tp = TangentP::MMG(p);
  const Matrix k_full = MatExp(-SkewEmbed(tp)) * qm;
  const Rotation mu = ProjectToRotation(k_full.topLeftCorner(d, d), false);
  const Rotation eta = ProjectToRotation(k_full.bottomRightCorner(l, l), false);
  Rotation k(BlockDiag(mu.matrix(), eta.matrix()), false);
  return {std::move(tp), std::move(k), it, f};
}

RigidMotion PsiInverseSE(const CompactImage& c) {
  if (c.source.kind != GroupKind::kSE) throw Error(ErrorCode::kInvalidArgument, "not an SE image");
  CartanFactors f = CartanDecomposeSO(c.Q);
  return {std::move(f.k), c.lambda * f.p.value.col(0)};
}

MMGElement PsiInverseMMG(const CompactImage& c, const CartanOptOptions& options) {
  if (c.source.kind != GroupKind::kMMG) throw Error(ErrorCode::kInvalidArgument, "not an MMG image");
  const int d = c.source.d;
  const int l = c.source.l;
  CartanOptOptions opts = options;
  if (opts.initial) *opts.initial /= c.lambda;
  const CartanFactors f = CartanDecomposeOpt(c.Q, d, l, opts);
  const Matrix& k = f.k.matrix();
  return {Rotation(k.topLeftCorner(d, d), false), Rotation(k.bottomRightCorner(l, l), false),
          c.lambda * f.p.value};
}

GroupElement PsiInverse(const CompactImage& c) {
  if (c.source.kind == GroupKind::kSE) return PsiInverseSE(c);
  if (c.source.kind == GroupKind::kMMG) return PsiInverseMMG(c);
  throw Error(ErrorCode::kInvalidArgument, "contraction is defined for SE and MMG only");
}

CompactImage Phi(const RigidMotion& g, double lambda) {
  RequireLambda(lambda);
  const int d = g.dim();
  const double nb = g.b.norm();
  if (nb == 0.0) return {Rotation(EmbedBlock(g.mu.matrix(), d + 1), true), lambda, GroupSpec::SE(d)};
  const double tau = 1.0 / std::sqrt(4.0 + (nb * nb) / (lambda * lambda));
  const Vector b_hat = g.b / nb;
  Matrix q(d + 1, d + 1);
  q.topLeftCorner(d, d) =
      (Matrix::Identity(d, d) + (2.0 * tau - 1.0) * b_hat * b_hat.transpose()) * g.mu.matrix();
  q.topRightCorner(d, 1) = (tau / lambda) * g.b;
  q.bottomLeftCorner(1, d) = -(tau / lambda) * g.b.transpose() * g.mu.matrix();
  q(d, d) = 2.0 * tau;
  return {Rotation(std::move(q), true), lambda, GroupSpec::SE(d)};
}

RigidMotion PhiInverse(const CompactImage& c) {
  if (c.source.kind != GroupKind::kSE) throw Error(ErrorCode::kInvalidArgument, "not an SE image");
  const int d = c.source.d;
  const double lambda = c.lambda;
  const Matrix& q = c.Q.matrix();
  const double corner = q(d, d);
  if (!(corner > 0.0) || corner > 1.0 + 1e-12) {
    throw Error(ErrorCode::kNotInImage, "bottom-right entry outside (0, 1]");
  }
  const double tau = 0.5 * std::min(corner, 1.0);
  const Vector b = (lambda / tau) * q.col(d).head(d);
  const double nb = b.norm();
  Matrix mu = q.topLeftCorner(d, d);
  if (nb > 0.0) {
    const double c_coef = 2.0 * tau - 1.0;
    const Vector b_hat = b / nb;
    mu = (Matrix::Identity(d, d) - (c_coef / (1.0 + c_coef)) * b_hat * b_hat.transpose()) * mu;
  }
  constexpr double kStructureTol = 1e-6;
  const double orth_defect = (mu.transpose() * mu - Matrix::Identity(d, d)).norm();
  const Vector row_expected = -(tau / lambda) * (b.transpose() * mu).transpose();
  const double row_defect = (q.row(d).head(d).transpose() - row_expected).norm();
  if (orth_defect > kStructureTol || row_defect > kStructureTol || mu.determinant() <= 0.0) {
    throw Error(ErrorCode::kNotInImage, "matrix is not consistent with the polar projection form");
  }
  return {ProjectToRotation(mu, true), b};
}

double HomomorphismResidual(const GroupElement& g1, const GroupElement& g2, double lambda,
                            MapKind map) {
  if (map == MapKind::kPsi) {
    const double radius = LinearPartNorm(g1) + LinearPartNorm(g2);
    if (radius > kHomomorphismRadius * lambda) {
      throw Error(ErrorCode::kRadiusViolated,
                  "||v1|| + ||v2|| exceeds 0.59 * lambda (" + std::to_string(radius) + ")");
    }
  }
  const GroupElement g12 = Compose(g1, g2);
  const Matrix lhs = ForwardMap(g12, lambda, map).Q.matrix();
  const Matrix rhs = ForwardMap(g1, lambda, map).Q.matrix() * ForwardMap(g2, lambda, map).Q.matrix();
  return (lhs - rhs).norm();
}

CompactImage ForwardMap(const GroupElement& g, double lambda, MapKind map) {
  if (map == MapKind::kPhi) return Phi(AsSE(g), lambda);
  return Psi(g, lambda);
}

GroupElement BackMap(const CompactImage& c, MapKind map) {
  if (map == MapKind::kPhi) return PhiInverse(c);
  return PsiInverse(c);
}

}  // namespace cartan_sync
