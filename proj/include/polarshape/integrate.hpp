// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "polarshape/core.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <vector>

namespace polarshape::integrate {

/// Weights of the normal, data and smoothness terms.
struct IntegrationWeights {
  double normal = 1.0;
  double data = 0.06;
  double smooth = 0.55;

  void validate() const;
};

enum class ResidualKind : unsigned char { kNormalX, kNormalY, kData, kSmooth };

/// Linear least-squares system  min |A d - b|^2  over the depths d of the
/// unknown pixels. Column j is pixel `unknown_pixels[j]` (row-major index).
struct SparseSystem {
  Eigen::SparseMatrix<double, Eigen::RowMajor> A;
  Eigen::VectorXd b;
  Eigen::VectorXd base;  // base depth per unknown; used as the starting point
  std::vector<ResidualKind> row_kinds;
  std::vector<std::size_t> unknown_pixels;
  int width = 0;
  int height = 0;

  std::size_t unknowns() const { return unknown_pixels.size(); }
};

/// Builds the three-term system. Unknowns are the pixels valid in `base`.
///
///  normal rows   sqrt(w_n) n . (P(q) - P(p)) for the right and lower
///                neighbour q of every foreground pixel p, where
///                P(p) = D_p ((x - px)/fx, (y - py)/fy, 1) and n is the
///                outward normal in the camera frame;
///  data rows     sqrt(w_d) (((x-px)/fx)^2 + ((y-py)/fy)^2 + 1) (D_p - base_p);
///  smooth rows   sqrt(w_s) (D_p - D_q) for each 4-neighbour pair, once.
SparseSystem assemble_system(const NormalMap& normals, const DepthMap& base,
                             const CameraIntrinsics& intrinsics,
                             const IntegrationWeights& weights = {});

struct SolverOptions {
  double tolerance = 1e-8;  // on |A^T (A d - b)| / |A^T b|
  int max_iterations = 0;   // 0 -> 10 * sqrt(unknowns)
};

struct DepthSolution {
  DepthMap depth;
  Eigen::VectorXd values;  // per unknown
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves the normal equations A^T A d = A^T b by Jacobi-preconditioned
/// conjugate gradients started from the base depth. Throws NumericalError
/// (message carries the residual) when max_iterations is exhausted.
DepthSolution solve_depth(const SparseSystem& system, const SolverOptions& options = {});

/// |A d - b|^2.
double objective(const SparseSystem& system, const Eigen::VectorXd& values);

/// |A^T (A d - b)| / |A^T b|.
double normal_equation_residual(const SparseSystem& system, const Eigen::VectorXd& values);

/// assemble_system followed by solve_depth.
DepthSolution refine_depth(const NormalMap& normals, const DepthMap& base,
                           const CameraIntrinsics& intrinsics,
                           const IntegrationWeights& weights = {},
                           const SolverOptions& options = {});

/// Normals perpendicular to the forward chords P(x+1, y) - P(x, y) and
/// P(x, y+1) - P(x, y) of the back-projected depth map (backward chords where
/// the forward neighbour is invalid). A depth map and its chord normals make
/// every normal residual of assemble_system vanish.
NormalMap chord_normals(const DepthMap& depth, const CameraIntrinsics& intrinsics);

/// Root mean square of a - b over pixels valid in both (and in `mask` if given).
double depth_rmse(const DepthMap& a, const DepthMap& b, const Mask* mask = nullptr);

}  // namespace polarshape::integrate
