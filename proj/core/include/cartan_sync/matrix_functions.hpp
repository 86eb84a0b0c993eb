#pragma once

#include <Eigen/Dense>

namespace cartan_sync {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Principal matrix exponential (scaling and squaring, diagonal Pade 13/13).
Matrix MatExp(const Matrix& a);

/// Frechet derivative of the exponential at `a` in direction `e`, i.e. the
/// first-order term of exp(a + t e) in t.
Matrix ExpFrechet(const Matrix& a, const Matrix& e);

/// Principal square root via the product form of the Denman-Beavers iteration.
/// The input must have no eigenvalues on the closed negative real axis.
Matrix MatSqrt(const Matrix& a);

/// Principal logarithm of a general real matrix by inverse scaling and
/// squaring. Throws AngleAtPi when `a` has an eigenvalue on the closed
/// negative real axis (within 1e-8).
Matrix MatLog(const Matrix& a);

/// Principal logarithm of an orthogonal matrix through its real Schur form.
/// The result is exactly skew-symmetric. Throws AngleAtPi when an eigenvalue
/// lies within 1e-8 of -1.
Matrix OrthLog(const Matrix& r);

/// Largest rotation angle of exp(s) for a skew-symmetric s (its spectral norm).
double SkewAngle(const Matrix& s);

}  // namespace cartan_sync
