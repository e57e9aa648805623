// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "polarshape/core.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace polarshape {

/// Static 3D k-d tree for exact nearest-neighbour queries. Among equidistant
/// points the smallest index wins, so results match a brute-force scan.
class KdTree {
 public:
  struct Match {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };

  explicit KdTree(std::span<const Vec3> points);

  Match nearest(const Vec3& query) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::size_t point = 0;  // index into points_
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(std::vector<std::size_t>& order, std::size_t begin, std::size_t end, int depth);
  void search(int node, const Vec3& q, Match& best) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace polarshape
