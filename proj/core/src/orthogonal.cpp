#include "latfuse/orthogonal.hpp"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/LU>

namespace latfuse {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

Vector normalized(const Vector& v, double& norm) {
  norm = v.norm();
  if (!(norm > kMinHouseholderNorm)) {
    throw std::invalid_argument("Householder vector is too close to zero");
  }
  return v / norm;
}

}  // namespace

Matrix householder_matrix(const Vector& v) {
  double norm = 0.0;
  const Vector w = normalized(v, norm);
  const auto n = v.size();
  Matrix h = Matrix::Identity(n, n);
  h.noalias() -= 2.0 * w * w.transpose();
  return h;
}

Vector householder_vjp(const Vector& v, const Matrix& h_bar) {
  double norm = 0.0;
  const Vector w = normalized(v, norm);
  const Vector dw = -2.0 * (h_bar + h_bar.transpose()) * w;
  // Project out the radial part: H depends on the direction of v only.
  return (dw - w * w.dot(dw)) / norm;
}

std::vector<Vector> reflection_factors(const Matrix& q) {
  const auto n = q.rows();
  if (n != q.cols()) throw std::invalid_argument("reflection_factors: non-square matrix");
  std::vector<Vector> out;
  Matrix m = q;
  for (Eigen::Index k = 0; k < n; ++k) {
    Vector v = m.col(k);
    v(k) -= 1.0;
    if (v.norm() <= 1e-12) continue;
    const Matrix h = householder_matrix(v);
    m = h * m;
    out.push_back(std::move(v));
  }
  return out;
}

Matrix matrix_exp(const Matrix& a) {
  require_finite(a, "matrix_exp");
  const auto n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("matrix_exp: non-square matrix");
  if (a.isZero(0.0)) return Matrix::Identity(n, n);
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  }
  const Matrix s = a * std::ldexp(1.0, -squarings);
  const Matrix id = Matrix::Identity(n, n);
  const Matrix s2 = s * s;
  const Matrix s4 = s2 * s2;
  const Matrix s6 = s4 * s2;
  const Matrix u_inner = s6 * (b[13] * s6 + b[11] * s4 + b[9] * s2) + b[7] * s6 + b[5] * s4 +
                         b[3] * s2 + b[1] * id;
  const Matrix u = s * u_inner;
  const Matrix v = s6 * (b[12] * s6 + b[10] * s4 + b[8] * s2) + b[6] * s6 + b[4] * s4 +
                   b[2] * s2 + b[0] * id;
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

Matrix matrix_exp_frechet(const Matrix& a, const Matrix& e) {
  const auto n = a.rows();
  Matrix big = Matrix::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = a;
  big.topRightCorner(n, n) = e;
  big.bottomRightCorner(n, n) = a;
  return matrix_exp(big).topRightCorner(n, n);
}

Matrix matrix_exp_vjp(const Matrix& a, const Matrix& g_bar) {
  require_finite(g_bar, "matrix_exp_vjp");
  return matrix_exp_frechet(a.transpose(), g_bar);
}

ExpParam skew_init(int n, double scale, Rng& rng) {
  if (n < 1) throw std::invalid_argument("skew_init: n must be positive");
  if (!(scale >= 0.0)) throw std::invalid_argument("skew_init: scale must be non-negative");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
  }
  ExpParam p{Matrix::Zero(n, n)};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = scale * (m(i, j) - m(j, i)) / 2.0;
      p.a(i, j) = v;
      p.a(j, i) = -v;
    }
  }
  return p;
}

}  // namespace latfuse
