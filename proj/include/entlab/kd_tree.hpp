#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "entlab/linalg.hpp"

namespace entlab {

/// Static kd-tree over a point set with median splits along the widest
/// coordinate, for exact k-nearest-neighbor queries in Euclidean norm.
class KdTree {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  struct Neighbor {
    std::size_t index;  // column in the original point matrix
    double squared_distance;
  };

  /// `points` holds one point per column. The tree keeps its own copy.
  explicit KdTree(const Matrix& points, std::size_t leaf_size = 12);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return ids_.size(); }

  /// The k nearest stored points to `query`, closest first. `exclude` is an
  /// original column index to skip (used for leave-one-out queries).
  [[nodiscard]] std::vector<Neighbor> nearest(std::span<const double> query, int k, std::size_t exclude = npos) const;

  /// Euclidean distance from stored point `index` to its k-th nearest other
  /// stored point.
  [[nodiscard]] double kth_neighbor_distance(std::size_t index, int k) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t split_dim = -1;
    double split_value = 0.0;
  };

  struct Query;

  std::int32_t build(std::uint32_t begin, std::uint32_t end, std::vector<std::uint32_t>& order, const Matrix& points);
  void search(std::int32_t node, double min_dist, Query& q) const;

  int dim_ = 0;
  std::size_t leaf_size_;
  std::vector<double> data_;         // permuted points, contiguous
  std::vector<std::uint32_t> ids_;   // storage slot -> original index
  std::vector<std::uint32_t> slot_;  // original index -> storage slot
  std::vector<Node> nodes_;
};

}  // namespace entlab
