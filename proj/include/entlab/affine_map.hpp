#pragma once

#include <span>

#include "entlab/linalg.hpp"

namespace entlab {

/// x -> linear * x + shift with an invertible linear part.
///
/// The log-determinant is computed once at construction (exactly from the
/// diagonal when the linear part is diagonal, from an LU factorization
/// otherwise) and carried along for entropy bookkeeping: h(u(X)) = h(X) +
/// log_det.
class AffineMap {
 public:
  /// Throws InvalidParameter when the linear part is not square, does not
  /// match the shift, or is singular.
  AffineMap(Matrix linear, Vector shift);

  static AffineMap identity(int dim);
  static AffineMap scaling(int dim, double factor);
  static AffineMap translation(Vector shift);
  static AffineMap diagonal(const Vector& scales, Vector shift);

  [[nodiscard]] int dim() const { return static_cast<int>(shift_.size()); }
  [[nodiscard]] const Matrix& linear() const { return linear_; }
  [[nodiscard]] const Vector& shift() const { return shift_; }
  [[nodiscard]] double log_det() const { return log_det_; }
  [[nodiscard]] bool diagonal() const { return diagonal_; }

  [[nodiscard]] Vector apply(const Vector& x) const { return linear_ * x + shift_; }
  void apply(std::span<const double> x, std::span<double> out) const;
  [[nodiscard]] Vector apply_inverse(const Vector& y) const;
  void apply_inverse(std::span<const double> y, std::span<double> out) const;

  /// The map y -> next(this(y)).
  [[nodiscard]] AffineMap then(const AffineMap& next) const;
  [[nodiscard]] AffineMap inverse() const;
  [[nodiscard]] const Matrix& linear_inverse() const { return inverse_; }

 private:
  Matrix linear_;
  Vector shift_;
  Matrix inverse_;
  double log_det_ = 0.0;
  bool diagonal_ = false;
};

}  // namespace entlab
