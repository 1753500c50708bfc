#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "shapeval/geometry/types.hpp"

namespace shapeval {

struct NearestHit {
  std::size_t index = 0;
  double sq_dist = std::numeric_limits<double>::infinity();
};

/// Exact nearest-neighbor kd-tree over a fixed point set.
///
/// Results are identical to a brute-force scan, including the tie rule
/// (lowest index among equidistant points). Immutable after construction,
/// so concurrent queries are safe.
class NNIndex {
 public:
  explicit NNIndex(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    if (points_.empty()) fail(ErrorCode::EmptyGeometry, "nearest-neighbor index over no points");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(order_.size()));
  }

  explicit NNIndex(const PointCloud& pc) : NNIndex(std::span<const Vec3>(pc.points)) {}

  std::size_t size() const { return points_.size(); }

  NearestHit nearest(Vec3 q) const {
    NearestHit best;
    search(0, q, best);
    return best;
  }

 private:
  static constexpr std::uint32_t kLeafSize = 8;

  struct Node {
    double split = 0;
    std::uint32_t axis = 0;
    std::uint32_t begin = 0, end = 0;            // leaf range in order_
    std::uint32_t left = 0, right = 0;           // child node ids
    bool leaf = true;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    if (end - begin <= kLeafSize) {
      nodes_[id].begin = begin;
      nodes_[id].end = end;
      return id;
    }
    Vec3 lo = points_[order_[begin]], hi = lo;
    for (std::uint32_t i = begin; i < end; ++i) {
      const Vec3& p = points_[order_[i]];
      for (std::size_t a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
    std::uint32_t axis = 0;
    for (std::uint32_t a = 1; a < 3; ++a) {
      if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    }
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t l, std::uint32_t r) {
                       const double cl = points_[l][axis], cr = points_[r][axis];
                       return cl < cr || (cl == cr && l < r);
                     });
    const double split = points_[order_[mid]][axis];
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    Node& node = nodes_[id];
    node.leaf = false;
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  void search(std::uint32_t id, Vec3 q, NearestHit& best) const {
    const Node& node = nodes_[id];
    if (node.leaf) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const double d = squared_distance(q, points_[idx]);
        if (d < best.sq_dist || (d == best.sq_dist && idx < best.index)) best = {idx, d};
      }
      return;
    }
    // Left subtree coordinates are <= split, right subtree >= split, so the
    // plane distance is a floating-point lower bound on every point behind it.
    const double diff = q[node.axis] - node.split;
    const std::uint32_t near = diff < 0 ? node.left : node.right;
    const std::uint32_t far = diff < 0 ? node.right : node.left;
    search(near, q, best);
    if (diff * diff <= best.sq_dist) search(far, q, best);
  }

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

inline NNIndex build_index(const PointCloud& pc) { return NNIndex(pc); }

inline NearestHit query_nn(const NNIndex& index, Vec3 q) { return index.nearest(q); }

}  // namespace shapeval
