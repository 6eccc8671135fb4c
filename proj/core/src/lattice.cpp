#include "latfuse/lattice.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

#include "latfuse/errors.hpp"

namespace latfuse {

GeneratorMatrix::GeneratorMatrix(Matrix rows) : rows_(std::move(rows)), volume_(0.0) {
  if (rows_.rows() == 0 || rows_.rows() != rows_.cols()) {
    throw DegenerateLatticeError("generator must be a non-empty square matrix, got " +
                                 std::to_string(rows_.rows()) + "x" +
                                 std::to_string(rows_.cols()));
  }
  if (!rows_.allFinite()) {
    throw DegenerateLatticeError("generator has non-finite entries");
  }
  volume_ = std::abs(rows_.partialPivLu().determinant());
  if (!(volume_ > kMinAbsDet)) {
    throw DegenerateLatticeError("generator rows are linearly dependent (|det| = " +
                                 std::to_string(volume_) + ")");
  }
}

GeneratorMatrix GeneratorMatrix::identity(int n) {
  return GeneratorMatrix(Matrix::Identity(n, n));
}

Matrix gram(const GeneratorMatrix& g) {
  return g.rows() * g.rows().transpose();
}

double volume(const GeneratorMatrix& g) { return g.volume(); }

double volume(const Matrix& m, double min_abs_det) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DegenerateLatticeError("volume of a non-square matrix");
  }
  const double v = std::abs(m.partialPivLu().determinant());
  if (!std::isfinite(v) || v < min_abs_det) {
    throw DegenerateLatticeError("singular matrix (|det| = " + std::to_string(v) + ")");
  }
  return v;
}

GeneratorMatrix scale(const GeneratorMatrix& g, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("scale factor must be positive and finite");
  }
  return GeneratorMatrix(g.rows() * a);
}

GeneratorMatrix direct_sum(const GeneratorMatrix& g1, const GeneratorMatrix& g2) {
  const int n1 = g1.dim();
  const int n2 = g2.dim();
  Matrix out = Matrix::Zero(n1 + n2, n1 + n2);
  out.topLeftCorner(n1, n1) = g1.rows();
  out.bottomRightCorner(n2, n2) = g2.rows();
  return GeneratorMatrix(std::move(out));
}

GeneratorMatrix dual(const GeneratorMatrix& g) {
  return GeneratorMatrix(g.rows().inverse().transpose());
}

double volume_power(double volume, int n) {
  int exponent = 0;
  const double mantissa = std::frexp(volume, &exponent);
  const long long twice = 2LL * exponent;
  long long q = twice / n;
  long long r = twice % n;
  if (r < 0) {
    r += n;
    --q;
  }
  const double head = std::pow(mantissa, 2.0 / n) *
                      std::exp2(static_cast<double>(r) / static_cast<double>(n));
  return std::ldexp(head, static_cast<int>(q));
}

}  // namespace latfuse
