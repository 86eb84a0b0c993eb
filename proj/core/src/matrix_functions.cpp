#include "cartan_sync/matrix_functions.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "cartan_sync/error.hpp"

namespace cartan_sync {
namespace {

constexpr double kPade13Theta = 5.371920351148152;
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

// Gauss-Legendre nodes/weights on [0, 1].
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Quadrature GaussLegendreUnit(int m) {
  Quadrature q;
  for (int i = 1; i <= m; ++i) {
    double x = std::cos(std::numbers::pi * (i - 0.25) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    q.nodes.push_back(0.5 * (x + 1.0));
    q.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
  }
  return q;
}

double Norm1(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

void CheckNegativeAxis(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  for (const auto& ev : es.eigenvalues()) {
    if (ev.real() <= 0.0 && std::abs(ev.imag()) < 1e-8) {
      throw Error(ErrorCode::kAngleAtPi, "matrix has an eigenvalue on the negative real axis");
    }
  }
}

}  // namespace

Matrix MatExp(const Matrix& a) {
  const auto n = a.rows();
  if (n == 0) return a;
  const double norm = Norm1(a);
  int s = 0;
  if (norm > kPade13Theta) s = static_cast<int>(std::ceil(std::log2(norm / kPade13Theta)));
  const Matrix x = a / std::ldexp(1.0, s);

  const Matrix ident = Matrix::Identity(n, n);
  const Matrix x2 = x * x;
  const Matrix x4 = x2 * x2;
  const Matrix x6 = x4 * x2;
  const auto& b = kPade13;
  const Matrix u_inner = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 +
                         b[3] * x2 + b[1] * ident;
  const Matrix u = x * u_inner;
  const Matrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 +
                   b[2] * x2 + b[0] * ident;
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < s; ++k) r = r * r;
  return r;
}

Matrix ExpFrechet(const Matrix& a, const Matrix& e) {
  const auto n = a.rows();
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = a;
  block.bottomRightCorner(n, n) = a;
  block.topRightCorner(n, n) = e;
  return MatExp(block).topRightCorner(n, n);
}

Matrix MatSqrt(const Matrix& a) {
  const auto n = a.rows();
  const Matrix ident = Matrix::Identity(n, n);
  Matrix m = a;
  Matrix y = a;
  for (int it = 0; it < 100; ++it) {
    const Matrix m_inv = m.partialPivLu().inverse();
    y = 0.5 * y * (ident + m_inv);
    m = 0.5 * (ident + 0.5 * (m + m_inv));
    if ((m - ident).norm() < 1e-15 * std::sqrt(static_cast<double>(n))) break;
  }
  return y;
}

Matrix MatLog(const Matrix& a) {
  const auto n = a.rows();
  if (n == 0) return a;
  CheckNegativeAxis(a);
  const Matrix ident = Matrix::Identity(n, n);
  Matrix x = a;
  int k = 0;
  while (Norm1(x - ident) > 0.25 && k < 60) {
    x = MatSqrt(x);
    ++k;
  }
  // Two extra roots push the Pade error far below roundoff.
  for (int extra = 0; extra < 2; ++extra, ++k) x = MatSqrt(x);
  x -= ident;

  static const Quadrature quad = GaussLegendreUnit(8);
  Matrix result = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < quad.nodes.size(); ++j) {
    const Matrix denom = ident + quad.nodes[j] * x;
    result += quad.weights[j] * denom.partialPivLu().solve(x);
  }
  return std::ldexp(1.0, k) * result;
}

Matrix OrthLog(const Matrix& r) {
  const auto n = r.rows();
  if (n == 0) return r;
  Eigen::RealSchur<Matrix> schur(r);
  const Matrix& t = schur.matrixT();
  const Matrix& u = schur.matrixU();

  Matrix log_t = Matrix::Zero(n, n);
  Eigen::Index i = 0;
  while (i < n) {
    const bool two_block = (i + 1 < n) && std::abs(t(i + 1, i)) > 1e-300;
    if (!two_block) {
      if (t(i, i) < 0.0) {
        throw Error(ErrorCode::kAngleAtPi, "orthogonal matrix has eigenvalue -1");
      }
      ++i;
      continue;
    }
    const double c = 0.5 * (t(i, i) + t(i + 1, i + 1));
    const double s = 0.5 * (t(i + 1, i) - t(i, i + 1));
    const double theta = std::atan2(s, c);
    if (2.0 * std::abs(std::cos(0.5 * theta)) < 1e-8) {
      throw Error(ErrorCode::kAngleAtPi, "rotation angle equals pi");
    }
    log_t(i, i + 1) = -theta;
    log_t(i + 1, i) = theta;
    i += 2;
  }
  Matrix out = u * log_t * u.transpose();
  return 0.5 * (out - out.transpose());
}

double SkewAngle(const Matrix& s) {
  if (s.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(s);
  return svd.singularValues()(0);
}

}  // namespace cartan_sync
