#include "entlab/kd_tree.hpp"

#include <algorithm>
#include <cmath>

#include "entlab/error.hpp"

namespace entlab {

struct KdTree::Query {
  const double* point;
  std::size_t k;
  std::size_t exclude_slot;
  std::vector<double> offsets;
  std::vector<std::pair<double, std::uint32_t>> heap;  // max-heap on distance

  [[nodiscard]] double worst() const {
    return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.front().first;
  }
  void offer(double d, std::uint32_t slot) {
    if (heap.size() < k) {
      heap.emplace_back(d, slot);
      std::push_heap(heap.begin(), heap.end());
    } else if (d < heap.front().first) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = {d, slot};
      std::push_heap(heap.begin(), heap.end());
    }
  }
};

KdTree::KdTree(const Matrix& points, std::size_t leaf_size)
    : dim_(static_cast<int>(points.rows())), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  const auto m = static_cast<std::size_t>(points.cols());
  if (dim_ < 1) throw InvalidParameter("kd-tree: points must have positive dimension");
  if (m == 0) throw InvalidParameter("kd-tree: empty point set");
  if (m >= std::numeric_limits<std::uint32_t>::max()) throw InvalidParameter("kd-tree: too many points");

  std::vector<std::uint32_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = static_cast<std::uint32_t>(i);
  nodes_.reserve(2 * m / leaf_size_ + 1);
  build(0, static_cast<std::uint32_t>(m), order, points);

  ids_ = order;
  slot_.assign(m, 0);
  data_.resize(m * static_cast<std::size_t>(dim_));
  for (std::size_t s = 0; s < m; ++s) {
    slot_[ids_[s]] = static_cast<std::uint32_t>(s);
    const double* src = points.col(ids_[s]).data();
    std::copy(src, src + dim_, data_.begin() + static_cast<std::ptrdiff_t>(s * static_cast<std::size_t>(dim_)));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, std::vector<std::uint32_t>& order,
                           const Matrix& points) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  int split_dim = 0;
  double widest = -1.0;
  for (int d = 0; d < dim_; ++d) {
    double lo = points(d, order[begin]), hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      const double v = points(d, order[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > widest) {
      widest = hi - lo;
      split_dim = d;
    }
  }
  if (widest <= 0.0) return id;  // all points identical

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return points(split_dim, a) < points(split_dim, b); });
  const double split = points(split_dim, order[mid]);

  nodes_[static_cast<std::size_t>(id)].split_dim = split_dim;
  nodes_[static_cast<std::size_t>(id)].split_value = split;
  const std::int32_t left = build(begin, mid, order, points);
  const std::int32_t right = build(mid, end, order, points);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void KdTree::search(std::int32_t node_id, double min_dist, Query& q) const {
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  if (node.left < 0) {
    const auto d = static_cast<std::size_t>(dim_);
    for (std::uint32_t s = node.begin; s < node.end; ++s) {
      if (s == q.exclude_slot) continue;
      const double* p = data_.data() + static_cast<std::size_t>(s) * d;
      const double bound = q.worst();
      double dist = 0.0;
      for (std::size_t j = 0; j < d && dist < bound; ++j) {
        const double diff = p[j] - q.point[j];
        dist += diff * diff;
      }
      if (dist < bound || q.heap.size() < q.k) q.offer(dist, s);
    }
    return;
  }
  const auto sd = static_cast<std::size_t>(node.split_dim);
  const double diff = q.point[sd] - node.split_value;
  const std::int32_t near = diff < 0.0 ? node.left : node.right;
  const std::int32_t far = diff < 0.0 ? node.right : node.left;
  search(near, min_dist, q);

  const double old = q.offsets[sd];
  const double far_dist = min_dist - old * old + diff * diff;
  if (far_dist < q.worst()) {
    q.offsets[sd] = diff;
    search(far, far_dist, q);
    q.offsets[sd] = old;
  }
}

std::vector<KdTree::Neighbor> KdTree::nearest(std::span<const double> query, int k, std::size_t exclude) const {
  if (static_cast<int>(query.size()) != dim_) throw InvalidParameter("kd-tree: query dimension mismatch");
  if (k < 1) throw InvalidParameter("kd-tree: k must be positive");
  Query q;
  q.point = query.data();
  q.k = static_cast<std::size_t>(k);
  q.exclude_slot = exclude == npos ? npos : slot_.at(exclude);
  q.offsets.assign(static_cast<std::size_t>(dim_), 0.0);
  q.heap.reserve(q.k + 1);
  search(0, 0.0, q);
  std::sort_heap(q.heap.begin(), q.heap.end());
  std::vector<Neighbor> out;
  out.reserve(q.heap.size());
  for (const auto& [d, s] : q.heap) out.push_back(Neighbor{ids_[s], d});
  return out;
}

double KdTree::kth_neighbor_distance(std::size_t index, int k) const {
  if (index >= size()) throw InvalidParameter("kd-tree: index out of range");
  if (static_cast<std::size_t>(k) >= size()) throw InvalidParameter("kd-tree: k must be smaller than the point count");
  const std::size_t s = slot_[index];
  const std::span<const double> point(data_.data() + s * static_cast<std::size_t>(dim_),
                                      static_cast<std::size_t>(dim_));
  const auto found = nearest(point, k, index);
  return std::sqrt(found.back().squared_distance);
}

}  // namespace entlab
