#include "latfuse/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace latfuse {

namespace {

// Recomputes row k of the Gram-Schmidt data, assuming rows < k are current.
void update_gs_row(const Matrix& b, int k, Matrix& mu, Vector& sq, Matrix& ortho) {
  const int n = static_cast<int>(b.cols());
  RowVector v = b.row(k);
  for (int j = 0; j < k; ++j) {
    mu(k, j) = b.row(k).dot(ortho.row(j)) / sq(j);
    v -= mu(k, j) * ortho.row(j);
  }
  mu(k, k) = 1.0;
  for (int j = k + 1; j < n; ++j) mu(k, j) = 0.0;
  ortho.row(k) = v;
  sq(k) = v.squaredNorm();
}

}  // namespace

GramSchmidt gram_schmidt(const Matrix& basis) {
  const int n = static_cast<int>(basis.rows());
  GramSchmidt gs{Matrix::Zero(n, n), Vector::Zero(n), Matrix::Zero(n, basis.cols())};
  for (int k = 0; k < n; ++k) update_gs_row(basis, k, gs.mu, gs.sq_norms, gs.ortho);
  return gs;
}

ReducedBasis lll_reduce(const GeneratorMatrix& g, double delta) {
  if (!(delta > 0.25 && delta < 1.0)) {
    throw std::invalid_argument("LLL delta must lie in (0.25, 1)");
  }
  const int n = g.dim();
  Matrix b = g.rows();
  IntMatrix u = IntMatrix::Identity(n, n);
  Matrix mu = Matrix::Zero(n, n);
  Vector sq = Vector::Zero(n);
  Matrix ortho = Matrix::Zero(n, n);
  update_gs_row(b, 0, mu, sq, ortho);

  int k = 1;
  while (k < n) {
    update_gs_row(b, k, mu, sq, ortho);
    // Size reduction. Repeated because a large quotient can leave rounding
    // residue above 1/2 in double precision.
    for (int pass = 0; pass < 8; ++pass) {
      bool changed = false;
      for (int j = k - 1; j >= 0; --j) {
        const double q = std::round(mu(k, j));
        if (q == 0.0) continue;
        changed = true;
        const auto qi = static_cast<std::int64_t>(q);
        b.row(k) -= q * b.row(j);
        u.row(k) -= qi * u.row(j);
        for (int i = 0; i <= j; ++i) mu(k, i) -= q * mu(j, i);
      }
      if (!changed) break;
      update_gs_row(b, k, mu, sq, ortho);
    }
    const double m = mu(k, k - 1);
    if (sq(k) >= (delta - m * m) * sq(k - 1)) {
      ++k;
    } else {
      b.row(k).swap(b.row(k - 1));
      u.row(k).swap(u.row(k - 1));
      update_gs_row(b, k - 1, mu, sq, ortho);
      k = std::max(k - 1, 1);
    }
  }
  // Recompute from the integer transform so the reduced rows are exactly the
  // lattice vectors U*G (up to one rounding per entry).
  Matrix reduced = u.cast<double>() * g.rows();
  return ReducedBasis{GeneratorMatrix(std::move(reduced)), std::move(u)};
}

std::int64_t integer_determinant(const IntMatrix& m) {
  const int n = static_cast<int>(m.rows());
  if (n != m.cols()) throw std::invalid_argument("integer_determinant: non-square matrix");
  if (n == 0) return 1;
  Eigen::Matrix<__int128, Eigen::Dynamic, Eigen::Dynamic> a = m.cast<__int128>();
  __int128 sign = 1;
  __int128 prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a(k, k) == 0) {
      int p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      a.row(k).swap(a.row(p));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
      }
    }
    prev = a(k, k);
  }
  return static_cast<std::int64_t>(sign * a(n - 1, n - 1));
}

double max_size_reduction_coeff(const GramSchmidt& gs) {
  double worst = 0.0;
  const int n = static_cast<int>(gs.mu.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) worst = std::max(worst, std::abs(gs.mu(i, j)));
  }
  return worst;
}

double min_lovasz_slack(const GramSchmidt& gs, double delta) {
  double worst = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(gs.sq_norms.size());
  for (int k = 1; k < n; ++k) {
    const double m = gs.mu(k, k - 1);
    const double slack = gs.sq_norms(k) - (delta - m * m) * gs.sq_norms(k - 1);
    worst = std::min(worst, slack / gs.sq_norms(k - 1));
  }
  return worst;
}

}  // namespace latfuse
