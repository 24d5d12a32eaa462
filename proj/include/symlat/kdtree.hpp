#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "symlat/dataset.hpp"
#include "symlat/error.hpp"

namespace symlat {

/// Exact nearest-neighbour index (k-d tree). Queries return the brute-force
/// argmin of squared Euclidean distance, ties going to the smaller row index.
class NeighborIndex {
 public:
  static constexpr std::size_t kLeafSize = 8;

  NeighborIndex(std::span<const double> points, std::size_t dim) : points_(points.begin(), points.end()), dim_(dim) {
    if (dim_ == 0 || points_.size() % dim_ != 0) throw DimensionMismatch("point buffer is not a multiple of dim");
    const std::size_t n = points_.size() / dim_;
    if (n == 0) throw ArgumentError("neighbor index needs at least one point");
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * n / kLeafSize + 2);
    build(0, n);
  }

  explicit NeighborIndex(const RegressionDataset& data) : NeighborIndex(data.features(), data.dim()) {}

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  /// Squared distance summed in coordinate order.
  double distance2(std::span<const double> q, std::size_t i) const {
    const double* p = points_.data() + i * dim_;
    double s = 0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double d = q[k] - p[k];
      s += d * d;
    }
    return s;
  }

  std::size_t nearest(std::span<const double> q) const {
    if (q.size() != dim_) throw DimensionMismatch("query dimension differs from index");
    Best best;
    search(0, q, best);
    return best.index;
  }

 private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range in order_
    std::size_t axis = 0;
    double split = 0;
    std::size_t left = 0, right = 0;  // child node ids; 0 means leaf
  };
  struct Best {
    double d2 = std::numeric_limits<double>::infinity();
    std::size_t index = std::numeric_limits<std::size_t>::max();
  };

  double coord(std::size_t i, std::size_t k) const { return points_[i * dim_ + k]; }

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{begin, end, 0, 0, 0, 0});
    if (end - begin <= kLeafSize) return id;
    std::size_t axis = 0;
    double widest = -1;
    for (std::size_t k = 0; k < dim_; ++k) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t p = begin; p < end; ++p) {
        lo = std::min(lo, coord(order_[p], k));
        hi = std::max(hi, coord(order_[p], k));
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        axis = k;
      }
    }
    if (widest <= 0) return id;  // all points identical: keep as a leaf
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) { return coord(a, axis) < coord(b, axis); });
    const double split = coord(order_[mid], axis);
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::size_t id, std::span<const double> q, Best& best) const {
    const Node& node = nodes_[id];
    if (node.left == 0) {
      for (std::size_t p = node.begin; p < node.end; ++p) {
        const std::size_t i = order_[p];
        const double d2 = distance2(q, i);
        if (d2 < best.d2 || (d2 == best.d2 && i < best.index)) {
          best.d2 = d2;
          best.index = i;
        }
      }
      return;
    }
    // left holds coordinates <= split, right holds coordinates >= split
    const double diff = q[node.axis] - node.split;
    const std::size_t near = diff < 0 ? node.left : node.right;
    const std::size_t far = diff < 0 ? node.right : node.left;
    search(near, q, best);
    if (diff * diff <= best.d2) search(far, q, best);
  }

  std::vector<double> points_;
  std::size_t dim_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

inline NeighborIndex build_index(const RegressionDataset& data) { return NeighborIndex(data); }

}  // namespace symlat
