#pragma once

#include <cstdint>
#include <vector>

#include "latfuse/lattice.hpp"
#include "latfuse/reduction.hpp"

namespace latfuse {

/// A lattice point z * G near a target x, with dist_sq = |x - z*G|^2.
struct CvpResult {
  IntRowVector coeffs;
  double dist_sq = 0.0;
};

/// Relative radius slack used by the enumeration so that minimizers sitting
/// on the search sphere are not lost to rounding.
inline constexpr double kEnumerationSlack = 1e-9;

/// Exact closest/shortest-vector queries on one lattice. The constructor
/// LLL-reduces the basis and caches its Gram-Schmidt data; queries are const
/// and safe to call concurrently. Coefficients are always reported in the
/// basis of the generator that was passed in.
class ClosestPointSolver {
 public:
  explicit ClosestPointSolver(const GeneratorMatrix& g, double delta = kDefaultLllDelta);

  /// Exact CVP by Schnorr-Euchner enumeration seeded with the Babai point.
  CvpResult closest_point(const RowVector& x) const;

  /// Babai nearest-plane on the reduced basis.
  CvpResult babai(const RowVector& x) const;

  /// A shortest nonzero lattice vector (ties broken by enumeration order).
  CvpResult shortest_vector() const;

  /// Every lattice point z*G with |x - z*G|^2 <= radius_sq.
  std::vector<CvpResult> points_within(const RowVector& x, double radius_sq) const;

  /// Number of nonzero vectors of minimal norm.
  std::int64_t kissing_number() const;

  const GeneratorMatrix& generator() const { return g_; }
  const ReducedBasis& reduction() const { return red_; }

 private:
  Vector gs_coordinates(const RowVector& x) const;
  CvpResult to_original(const std::vector<double>& z_reduced, const RowVector& x) const;

  GeneratorMatrix g_;
  ReducedBasis red_;
  GramSchmidt gs_;
  Matrix ortho_scaled_;  // columns b*_j / |b*_j|^2
  std::vector<double> mu_by_col_;  // mu(i,k) stored at [k*n + i]
};

CvpResult closest_point(const GeneratorMatrix& g, const RowVector& x);
CvpResult babai_nearest(const GeneratorMatrix& g, const RowVector& x);
CvpResult shortest_vector(const GeneratorMatrix& g);
std::int64_t kissing_number(const GeneratorMatrix& g);

}  // namespace latfuse
