// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarshape/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace polarshape {

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) throw InvalidArgument("KdTree: empty point set");
  std::vector<std::size_t> order(points_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  nodes_.reserve(points_.size());
  root_ = build(order, 0, order.size(), 0);
}

int KdTree::build(std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                  int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(begin),
                   order.begin() + static_cast<std::ptrdiff_t>(mid),
                   order.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double pa = points_[a][axis];
                     const double pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{order[mid], axis, -1, -1});
  const int left = build(order, begin, mid, depth + 1);
  const int right = build(order, mid + 1, end, depth + 1);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void KdTree::search(int node, const Vec3& q, Match& best) const {
  if (node < 0) return;
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  const Vec3& p = points_[nd.point];
  const double d2 = (q - p).squaredNorm();
  if (d2 < best.squared_distance || (d2 == best.squared_distance && nd.point < best.index)) {
    best = {nd.point, d2};
  }
  const double diff = q[nd.axis] - p[nd.axis];
  const int near = diff < 0.0 ? nd.left : nd.right;
  const int far = diff < 0.0 ? nd.right : nd.left;
  search(near, q, best);
  // <= keeps equidistant candidates on the far side reachable for tie-breaking.
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

KdTree::Match KdTree::nearest(const Vec3& query) const {
  Match best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
  search(root_, query, best);
  return best;
}

}  // namespace polarshape
