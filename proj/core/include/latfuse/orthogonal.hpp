#pragma once

#include <vector>

#include "latfuse/nsm.hpp"
#include "latfuse/types.hpp"

namespace latfuse {

/// One Householder vector per fusion block. The map normalizes internally, so
/// any nonzero vector yields an exactly orthogonal reflection.
struct HouseholderParam {
  std::vector<Vector> vectors;
};

/// Generator of R = exp(A). Skew at initialization, unconstrained afterwards.
struct ExpParam {
  Matrix a;
};

inline constexpr double kMinHouseholderNorm = 1e-8;

/// H = I - 2 v^ v^T with v^ = v / |v|. Throws std::invalid_argument when
/// |v| <= 1e-8.
Matrix householder_matrix(const Vector& v);

/// dL/dv given dL/dH = h_bar, through the normalization v^ = v / |v|.
Vector householder_vjp(const Vector& v, const Matrix& h_bar);

/// Vectors v_1..v_k, k <= n, with q = H(v_1) H(v_2) ... H(v_k) for an
/// orthogonal q; built column by column. Returns an empty list for q = I.
std::vector<Vector> reflection_factors(const Matrix& q);

/// exp(A) by scaling and squaring with the degree-13 Pade approximant.
/// Throws std::invalid_argument on non-finite input.
Matrix matrix_exp(const Matrix& a);

/// Frechet derivative L(A, E) of the exponential, read off the upper-right
/// block of exp([[A, E], [0, A]]).
Matrix matrix_exp_frechet(const Matrix& a, const Matrix& e);

/// dL/dA given dL/d exp(A) = g_bar; the adjoint of L(A, .) is L(A^T, .).
Matrix matrix_exp_vjp(const Matrix& a, const Matrix& g_bar);

/// A = scale * (M - M^T) / 2 with M i.i.d. standard normal; exactly skew.
ExpParam skew_init(int n, double scale, Rng& rng);

}  // namespace latfuse
