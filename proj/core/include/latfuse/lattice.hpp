#pragma once

#include "latfuse/types.hpp"

namespace latfuse {

/// Square generator matrix with basis vectors as rows; the lattice is
/// {z * G : z integer row vector}. Immutable once constructed.
class GeneratorMatrix {
 public:
  /// Singularity threshold on |det| applied at construction.
  static constexpr double kMinAbsDet = 1e-10;

  /// Throws DegenerateLatticeError for non-square, non-finite or singular input.
  explicit GeneratorMatrix(Matrix rows);

  static GeneratorMatrix identity(int n);

  int dim() const { return static_cast<int>(rows_.rows()); }
  const Matrix& rows() const { return rows_; }
  double operator()(int i, int j) const { return rows_(i, j); }

  /// |det G|, cached at construction.
  double volume() const { return volume_; }

 private:
  Matrix rows_;
  double volume_;
};

/// G * G^T.
Matrix gram(const GeneratorMatrix& g);

double volume(const GeneratorMatrix& g);

/// |det m| for an arbitrary square matrix; throws DegenerateLatticeError when
/// it falls below `min_abs_det`.
double volume(const Matrix& m, double min_abs_det = 1e-12);

/// a * G. Throws std::invalid_argument unless a > 0.
GeneratorMatrix scale(const GeneratorMatrix& g, double a);

/// Block-diagonal generator of the Cartesian product L1 x L2.
GeneratorMatrix direct_sum(const GeneratorMatrix& g1, const GeneratorMatrix& g2);

/// Generator (G^{-1})^T of the dual lattice.
GeneratorMatrix dual(const GeneratorMatrix& g);

/// V^{2/n}. The binary exponent of V is split off so that scaling V by 2^n
/// scales the result by exactly 4; this keeps normalized second moments
/// bit-identical under power-of-two rescaling of the generator.
double volume_power(double volume, int n);

}  // namespace latfuse
