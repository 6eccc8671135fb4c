#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "latfuse/orthogonal.hpp"
#include "oracles.hpp"

namespace latfuse {
namespace {

using testing::central_diff;
using testing::random_matrix;
using testing::random_orthogonal;
using testing::random_skew;
using testing::rel_err;

Vector random_vector(int n, std::mt19937_64& rng) { return random_matrix(n, 1, rng).col(0); }

// Row-major flattening, matching the layout used by the tests below.
Vector flatten(const Matrix& m) {
  Vector out(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i * m.cols() + j) = m(i, j);
  return out;
}

Matrix unflatten(const Vector& v, Eigen::Index n) {
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = v(i * n + j);
  return m;
}

TEST(Householder, AxisReflection) {
  const Matrix h = householder_matrix(Vector::Unit(3, 0));
  EXPECT_EQ(h, Eigen::Vector3d(-1, 1, 1).asDiagonal().toDenseMatrix());
}

TEST(Householder, ReflectionProperties) {
  std::mt19937_64 rng(1);
  for (int n : {2, 13, 22}) {
    for (int t = 0; t < 100; ++t) {
      const Matrix h = householder_matrix(random_vector(n, rng));
      const Matrix id = Matrix::Identity(n, n);
      EXPECT_LE((h - h.transpose()).norm(), 1e-13);
      EXPECT_LE((h * h - id).norm(), 1e-13);
      EXPECT_LE((h * h.transpose() - id).norm(), 1e-13);
    }
    EXPECT_NEAR(householder_matrix(random_vector(n, rng)).determinant(), -1.0, 1e-12);
  }
}

TEST(Householder, ScaleInvariant) {
  std::mt19937_64 rng(2);
  const Vector v = random_vector(5, rng);
  EXPECT_LE((householder_matrix(v) - householder_matrix(2.0 * v)).norm(), 1e-15);
}

TEST(Householder, RejectsTinyVector) {
  EXPECT_THROW(householder_matrix(Vector::Zero(3)), std::invalid_argument);
  EXPECT_THROW(householder_matrix(Vector::Constant(3, 1e-10)), std::invalid_argument);
}

TEST(HouseholderVjp, ZeroCotangent) {
  EXPECT_TRUE(householder_vjp(Vector::Unit(4, 1), Matrix::Zero(4, 4)).isZero());
}

TEST(HouseholderVjp, OrthogonalToV) {
  Matrix e11 = Matrix::Zero(3, 3);
  e11(0, 0) = 1.0;
  const Vector v = Vector::Unit(3, 0);
  EXPECT_NEAR(householder_vjp(v, e11).dot(v), 0.0, 1e-15);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const Vector w = random_vector(6, rng);
    EXPECT_NEAR(householder_vjp(w, random_matrix(6, 6, rng)).dot(w), 0.0, 1e-12);
  }
}

TEST(HouseholderVjp, MatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 6;
    const Vector v = random_vector(n, rng);
    const Matrix h_bar = random_matrix(n, n, rng);
    const auto f = [&](const Vector& w) { return (h_bar.cwiseProduct(householder_matrix(w))).sum(); };
    const Vector fd = central_diff(f, v, 1e-5);
    EXPECT_LE(rel_err(householder_vjp(v, h_bar), fd), 1e-5) << "instance " << t;
  }
}

TEST(ReflectionFactors, IdentityNeedsNone) {
  EXPECT_TRUE(reflection_factors(Matrix::Identity(4, 4)).empty());
}

TEST(ReflectionFactors, ReproducesRandomOrthogonal) {
  std::mt19937_64 rng(5);
  for (int n : {2, 5, 13, 22}) {
    const Matrix q = random_orthogonal(n, rng);
    const auto vs = reflection_factors(q);
    EXPECT_LE(static_cast<int>(vs.size()), n);
    Matrix prod = Matrix::Identity(n, n);
    for (const auto& v : vs) prod = prod * householder_matrix(v);
    EXPECT_LE((prod - q).norm(), 1e-8) << n;
  }
}

TEST(ReflectionFactors, ProductsOfReflectionsAreOrthogonal) {
  std::mt19937_64 rng(6);
  for (int n : {3, 13, 22}) {
    Matrix prod = Matrix::Identity(n, n);
    for (int k = 0; k < n; ++k) prod = prod * householder_matrix(random_vector(n, rng));
    EXPECT_LE((prod * prod.transpose() - Matrix::Identity(n, n)).norm(), 1e-12);
  }
}

TEST(MatrixExp, Zero) { EXPECT_EQ(matrix_exp(Matrix::Zero(5, 5)), Matrix::Identity(5, 5)); }

TEST(MatrixExp, PlaneRotation) {
  const double th = 0.7;
  Matrix a(2, 2);
  a << 0, -th, th, 0;
  Matrix r(2, 2);
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  EXPECT_LE((matrix_exp(a) - r).norm(), 1e-15);
}

TEST(MatrixExp, SkewGivesRotation) {
  std::mt19937_64 rng(7);
  for (int n = 2; n <= 22; n += 4) {
    const Matrix r = matrix_exp(random_skew(n, 1.0, rng));
    EXPECT_LE((r.transpose() * r - Matrix::Identity(n, n)).norm(), 1e-12) << n;
    EXPECT_NEAR(r.determinant(), 1.0, 1e-10) << n;
  }
  const Matrix r = matrix_exp(random_skew(22, 3.0, rng));
  EXPECT_LE((r.transpose() * r - Matrix::Identity(22, 22)).norm(), 1e-12);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-10);
}

TEST(MatrixExp, MatchesTaylorOracle) {
  std::mt19937_64 rng(8);
  for (double norm : {1e-3, 0.5, 2.0, 5.0, 10.0}) {
    for (int n : {3, 8, 13}) {
      Matrix a = random_matrix(n, n, rng);
      a *= norm / a.norm();
      EXPECT_LE(rel_err(matrix_exp(a), testing::taylor_expm(a)), 1e-12) << norm << " " << n;
    }
  }
}

TEST(MatrixExp, MatchesEigenUnsupported) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_matrix(6, 6, rng) * 0.8;
    const Matrix ref = a.exp();
    EXPECT_LE(rel_err(matrix_exp(a), ref), 1e-12);
  }
}

TEST(MatrixExp, RejectsNonFinite) {
  Matrix a = Matrix::Zero(2, 2);
  a(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(matrix_exp(a), std::invalid_argument);
}

TEST(MatrixExp, LogarithmRoundTrip) {
  std::mt19937_64 rng(10);
  for (int n = 2; n <= 8; ++n) {
    Matrix q = random_orthogonal(n, rng);
    if (q.determinant() < 0) q.col(0) *= -1.0;
    const Matrix a = testing::rotation_log(q);
    EXPECT_LE((a + a.transpose()).norm(), 1e-12) << n;
    EXPECT_LE((matrix_exp(a) - q).norm(), 1e-8) << n;
  }
}

TEST(Frechet, MatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_matrix(4, 4, rng);
    const Matrix e = random_matrix(4, 4, rng);
    const double h = 1e-6;
    const Matrix fd = (matrix_exp(a + h * e) - matrix_exp(a - h * e)) / (2 * h);
    EXPECT_LE(rel_err(matrix_exp_frechet(a, e), fd), 1e-7);
  }
}

TEST(Frechet, DiagonalDividedDifferences) {
  Vector d(4);
  d << -1.0, 0.3, 0.3 + 1e-9, 2.0;
  std::mt19937_64 rng(12);
  const Matrix e = random_matrix(4, 4, rng);
  EXPECT_LE(rel_err(matrix_exp_frechet(d.asDiagonal(), e), testing::diagonal_frechet(d, e)), 1e-12);
}

TEST(ExpVjp, AtZeroIsIdentityMap) {
  std::mt19937_64 rng(13);
  const Matrix g = random_matrix(5, 5, rng);
  EXPECT_LE((matrix_exp_vjp(Matrix::Zero(5, 5), g) - g).norm(), 1e-14);
}

TEST(ExpVjp, DiagonalClosedForm) {
  Vector d(3);
  d << 0.2, -0.7, 1.1;
  std::mt19937_64 rng(14);
  const Matrix g = random_matrix(3, 3, rng);
  // A diagonal A equals its transpose, so the vjp is the Frechet derivative.
  EXPECT_LE(rel_err(matrix_exp_vjp(d.asDiagonal(), g), testing::diagonal_frechet(d, g)), 1e-12);
}

TEST(ExpVjp, MatchesFiniteDifferences) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 5;
    const Matrix a = random_matrix(n, n, rng) * 0.7;
    const Matrix g = random_matrix(n, n, rng);
    const auto f = [&](const Vector& x) { return g.cwiseProduct(matrix_exp(unflatten(x, n))).sum(); };
    const Vector fd = central_diff(f, flatten(a), 1e-5);
    EXPECT_LE(rel_err(flatten(matrix_exp_vjp(a, g)), fd), 1e-5) << "instance " << t;
  }
}

TEST(SkewInit, Examples) {
  auto rng = make_stream(1, 0);
  EXPECT_TRUE(skew_init(4, 0.0, rng).a.isZero());
  for (int t = 0; t < 10; ++t) {
    const Matrix a = skew_init(7, 1.3, rng).a;
    EXPECT_EQ(a, Matrix(-a.transpose()));
  }
  const Matrix a = skew_init(13, 0.01, rng).a;
  EXPECT_LT((matrix_exp(a) - Matrix::Identity(13, 13)).norm(), 0.2);
  EXPECT_LE((a + a.transpose()).cwiseAbs().maxCoeff(), 1e-14);
}

}  // namespace
}  // namespace latfuse
