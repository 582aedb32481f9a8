#pragma once

#include <Eigen/Dense>
#include <span>

namespace entlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ConstPoint = Eigen::Map<const Eigen::VectorXd>;
using PointRef = Eigen::Map<Eigen::VectorXd>;

inline ConstPoint as_vector(std::span<const double> x) {
  return ConstPoint(x.data(), static_cast<Eigen::Index>(x.size()));
}

inline PointRef as_vector(std::span<double> x) { return PointRef(x.data(), static_cast<Eigen::Index>(x.size())); }

inline std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

inline std::span<double> as_span(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

bool is_diagonal(const Matrix& m);

}  // namespace entlab
