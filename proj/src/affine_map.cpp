#include "entlab/affine_map.hpp"

#include <cmath>

#include "entlab/error.hpp"

namespace entlab {

bool is_diagonal(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

AffineMap::AffineMap(Matrix linear, Vector shift) : linear_(std::move(linear)), shift_(std::move(shift)) {
  const auto n = shift_.size();
  if (n == 0 || linear_.rows() != n || linear_.cols() != n)
    throw InvalidParameter("affine map: linear part must be n x n with n = shift size");
  if (!linear_.allFinite() || !shift_.allFinite()) throw InvalidParameter("affine map: non-finite entries");

  diagonal_ = is_diagonal(linear_);
  if (diagonal_) {
    inverse_ = Matrix::Zero(n, n);
    log_det_ = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = linear_(i, i);
      if (d == 0.0) throw InvalidParameter("affine map: singular linear part");
      log_det_ += std::log(std::abs(d));
      inverse_(i, i) = 1.0 / d;
    }
    return;
  }

  Eigen::FullPivLU<Matrix> lu(linear_);
  if (!lu.isInvertible()) throw InvalidParameter("affine map: singular linear part");
  const Matrix& packed = lu.matrixLU();
  log_det_ = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det_ += std::log(std::abs(packed(i, i)));
  if (!std::isfinite(log_det_)) throw InvalidParameter("affine map: singular linear part");
  inverse_ = lu.inverse();
}

AffineMap AffineMap::identity(int dim) { return AffineMap(Matrix::Identity(dim, dim), Vector::Zero(dim)); }

AffineMap AffineMap::scaling(int dim, double factor) {
  return AffineMap(factor * Matrix::Identity(dim, dim), Vector::Zero(dim));
}

AffineMap AffineMap::translation(Vector shift) {
  const auto n = shift.size();
  return AffineMap(Matrix::Identity(n, n), std::move(shift));
}

AffineMap AffineMap::diagonal(const Vector& scales, Vector shift) {
  return AffineMap(Matrix(scales.asDiagonal()), std::move(shift));
}

void AffineMap::apply(std::span<const double> x, std::span<double> out) const {
  as_vector(out) = linear_ * as_vector(x) + shift_;
}

Vector AffineMap::apply_inverse(const Vector& y) const { return inverse_ * (y - shift_); }

void AffineMap::apply_inverse(std::span<const double> y, std::span<double> out) const {
  if (diagonal_) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      out[i] = inverse_(k, k) * (y[i] - shift_(k));
    }
    return;
  }
  as_vector(out).noalias() = inverse_ * (as_vector(y) - shift_);
}

AffineMap AffineMap::then(const AffineMap& next) const {
  if (next.dim() != dim()) throw InvalidParameter("affine map: dimension mismatch in composition");
  return AffineMap(next.linear_ * linear_, next.linear_ * shift_ + next.shift_);
}

AffineMap AffineMap::inverse() const { return AffineMap(inverse_, -(inverse_ * shift_)); }

}  // namespace entlab
