#include "latfuse/cvp.hpp"

#include <cmath>
#include <limits>

namespace latfuse {

namespace {

// Schnorr-Euchner depth-first enumeration over integer vectors z with
// sum_k (c_k - z_k)^2 |b*_k|^2 <= bound, where c_k = t_k - sum_{i>k} z_i mu(i,k).
// `leaf(z, dist)` is called for every complete vector inside the bound and
// returns the (possibly shrunk) bound for the rest of the search.
template <class Leaf>
void enumerate(int n, const std::vector<double>& mu_by_col, const Vector& sq, const Vector& t,
               double bound, Leaf&& leaf) {
  std::vector<double> z(n), center(n), dx(n), ddx(n), partial(n + 1, 0.0);
  auto descend = [&](int k) {
    double c = t(k);
    const double* mu_col = mu_by_col.data() + static_cast<std::size_t>(k) * n;
    for (int i = k + 1; i < n; ++i) c -= z[i] * mu_col[i];
    center[k] = c;
    z[k] = std::round(c);
    dx[k] = ddx[k] = (c < z[k]) ? -1.0 : 1.0;
  };
  auto next_sibling = [&](int k) {
    z[k] += dx[k];
    ddx[k] = -ddx[k];
    dx[k] = ddx[k] - dx[k];
  };

  int k = n - 1;
  descend(k);
  while (true) {
    const double diff = center[k] - z[k];
    const double d = partial[k + 1] + diff * diff * sq(k);
    if (d <= bound) {
      if (k == 0) {
        bound = leaf(z, d);
        next_sibling(0);
      } else {
        partial[k] = d;
        --k;
        descend(k);
      }
    } else {
      ++k;
      if (k == n) break;
      next_sibling(k);
    }
  }
}

}  // namespace

ClosestPointSolver::ClosestPointSolver(const GeneratorMatrix& g, double delta)
    : g_(g), red_(lll_reduce(g, delta)), gs_(gram_schmidt(red_.reduced.rows())) {
  const int n = g_.dim();
  ortho_scaled_.resize(n, n);
  for (int j = 0; j < n; ++j) {
    ortho_scaled_.col(j) = gs_.ortho.row(j).transpose() / gs_.sq_norms(j);
  }
  mu_by_col_.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) mu_by_col_[static_cast<std::size_t>(k) * n + i] = gs_.mu(i, k);
  }
}

Vector ClosestPointSolver::gs_coordinates(const RowVector& x) const {
  return (x * ortho_scaled_).transpose();
}

CvpResult ClosestPointSolver::to_original(const std::vector<double>& z_reduced,
                                          const RowVector& x) const {
  const int n = g_.dim();
  IntRowVector zr(n);
  for (int i = 0; i < n; ++i) zr(i) = static_cast<std::int64_t>(z_reduced[i]);
  CvpResult out;
  out.coeffs = zr * red_.transform;
  const RowVector err = x - out.coeffs.cast<double>() * g_.rows();
  out.dist_sq = err.squaredNorm();
  return out;
}

CvpResult ClosestPointSolver::babai(const RowVector& x) const {
  const int n = g_.dim();
  const Vector t = gs_coordinates(x);
  std::vector<double> z(n);
  for (int k = n - 1; k >= 0; --k) {
    double c = t(k);
    const double* mu_col = mu_by_col_.data() + static_cast<std::size_t>(k) * n;
    for (int i = k + 1; i < n; ++i) c -= z[i] * mu_col[i];
    z[k] = std::round(c);
  }
  return to_original(z, x);
}

CvpResult ClosestPointSolver::closest_point(const RowVector& x) const {
  const int n = g_.dim();
  const Vector t = gs_coordinates(x);

  // The first leaf of the zig-zag order is the Babai point; its distance is the
  // initial search radius.
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  enumerate(n, mu_by_col_, gs_.sq_norms, t, best_dist,
            [&](const std::vector<double>& z, double d) {
              if (d < best_dist) {
                best_dist = d;
                best = z;
              }
              return best_dist * (1.0 + kEnumerationSlack);
            });
  return to_original(best, x);
}

CvpResult ClosestPointSolver::shortest_vector() const {
  const int n = g_.dim();
  const Vector t = Vector::Zero(n);
  // b_0 of the reduced basis is a lattice vector, so its norm bounds the minimum.
  double best_dist = gs_.sq_norms(0);
  std::vector<double> best(n, 0.0);
  best[0] = 1.0;
  enumerate(n, mu_by_col_, gs_.sq_norms, t, best_dist * (1.0 + kEnumerationSlack),
            [&](const std::vector<double>& z, double d) {
              bool nonzero = false;
              for (double v : z) nonzero = nonzero || v != 0.0;
              if (nonzero && d < best_dist) {
                best_dist = d;
                best = z;
              }
              return best_dist * (1.0 + kEnumerationSlack);
            });
  return to_original(best, RowVector::Zero(n));
}

std::vector<CvpResult> ClosestPointSolver::points_within(const RowVector& x,
                                                         double radius_sq) const {
  const int n = g_.dim();
  const Vector t = gs_coordinates(x);
  std::vector<CvpResult> out;
  enumerate(n, mu_by_col_, gs_.sq_norms, t, radius_sq * (1.0 + kEnumerationSlack),
            [&](const std::vector<double>& z, double) {
              auto r = to_original(z, x);
              if (r.dist_sq <= radius_sq) out.push_back(std::move(r));
              return radius_sq * (1.0 + kEnumerationSlack);
            });
  return out;
}

std::int64_t ClosestPointSolver::kissing_number() const {
  const int n = g_.dim();
  const double min_norm = shortest_vector().dist_sq;
  const double radius = min_norm + 1e-9 * std::max(1.0, min_norm);
  std::int64_t count = 0;
  for (const auto& r : points_within(RowVector::Zero(n), radius)) {
    if (!r.coeffs.isZero()) ++count;
  }
  return count;
}

CvpResult closest_point(const GeneratorMatrix& g, const RowVector& x) {
  return ClosestPointSolver(g).closest_point(x);
}

CvpResult babai_nearest(const GeneratorMatrix& g, const RowVector& x) {
  return ClosestPointSolver(g).babai(x);
}

CvpResult shortest_vector(const GeneratorMatrix& g) { return ClosestPointSolver(g).shortest_vector(); }

std::int64_t kissing_number(const GeneratorMatrix& g) { return ClosestPointSolver(g).kissing_number(); }

}  // namespace latfuse
