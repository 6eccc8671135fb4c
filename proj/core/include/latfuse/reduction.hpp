#pragma once

#include "latfuse/lattice.hpp"

namespace latfuse {

/// Result of basis reduction: reduced = transform * original, with transform
/// unimodular over the integers.
struct ReducedBasis {
  GeneratorMatrix reduced;
  IntMatrix transform;
};

/// Gram-Schmidt data of a row basis: rows b_i = sum_j mu(i,j) b*_j with
/// mu(i,i) = 1, and sq_norms(j) = |b*_j|^2.
struct GramSchmidt {
  Matrix mu;
  Vector sq_norms;
  Matrix ortho;  // rows are b*_j
};

GramSchmidt gram_schmidt(const Matrix& basis);

inline constexpr double kDefaultLllDelta = 0.99;

/// LLL reduction in double precision with exact integer bookkeeping of the
/// transform. delta must lie in (0.25, 1).
ReducedBasis lll_reduce(const GeneratorMatrix& g, double delta = kDefaultLllDelta);

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
/// Exact while intermediates fit in 128 bits.
std::int64_t integer_determinant(const IntMatrix& m);

/// Largest |mu(i,j)|, j < i.
double max_size_reduction_coeff(const GramSchmidt& gs);

/// Smallest slack of the Lovasz condition,
/// min_k |b*_k|^2 - (delta - mu(k,k-1)^2) |b*_{k-1}|^2, relative to |b*_{k-1}|^2.
double min_lovasz_slack(const GramSchmidt& gs, double delta);

}  // namespace latfuse
