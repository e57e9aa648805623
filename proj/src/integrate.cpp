// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarshape/integrate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace polarshape::integrate {

void IntegrationWeights::validate() const {
  if (!(normal >= 0.0) || !(data >= 0.0) || !(smooth >= 0.0) || !std::isfinite(normal) ||
      !std::isfinite(data) || !std::isfinite(smooth)) {
    throw InvalidArgument("integration weights must be finite and non-negative");
  }
  // Without the data term the depth is only known up to scale.
  if (data == 0.0) throw InvalidArgument("integration weights: the data weight must be positive");
}

SparseSystem assemble_system(const NormalMap& normals, const DepthMap& base,
                             const CameraIntrinsics& intrinsics,
                             const IntegrationWeights& weights) {
  require_same_shape(normals.image(), base.image(), "assemble_system");
  intrinsics.validate();
  weights.validate();
  if (intrinsics.width != base.width() || intrinsics.height != base.height()) {
    throw InvalidArgument("assemble_system: intrinsics size differs from the depth map");
  }
  const int w = base.width();
  const int h = base.height();

  SparseSystem sys;
  sys.width = w;
  sys.height = h;
  Image<int> column(w, h, -1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!base.valid(x, y)) continue;
      column(x, y) = static_cast<int>(sys.unknown_pixels.size());
      sys.unknown_pixels.push_back(column.index(x, y));
    }
  }
  if (sys.unknown_pixels.empty()) {
    throw InvalidArgument("assemble_system: the base depth has no valid pixel");
  }

  const double sn = std::sqrt(weights.normal);
  const double sd = std::sqrt(weights.data);
  const double ss = std::sqrt(weights.smooth);
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rhs;
  triplets.reserve(sys.unknown_pixels.size() * 9);
  rhs.reserve(sys.unknown_pixels.size() * 5);

  auto add_row = [&](ResidualKind kind, double value) {
    sys.row_kinds.push_back(kind);
    rhs.push_back(value);
    return static_cast<int>(rhs.size() - 1);
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int c = column(x, y);
      if (c < 0) continue;
      const Vec3 ray = intrinsics.ray(x, y);

      if (weights.normal > 0.0 && normals.is_foreground(x, y)) {
        const Vec3 n = to_camera_frame(normals(x, y));
        const double self = -sn * n.dot(ray);
        if (x + 1 < w && column(x + 1, y) >= 0) {
          const int r = add_row(ResidualKind::kNormalX, 0.0);
          triplets.emplace_back(r, c, self);
          triplets.emplace_back(r, column(x + 1, y), sn * n.dot(intrinsics.ray(x + 1, y)));
        }
        if (y + 1 < h && column(x, y + 1) >= 0) {
          const int r = add_row(ResidualKind::kNormalY, 0.0);
          triplets.emplace_back(r, c, self);
          triplets.emplace_back(r, column(x, y + 1), sn * n.dot(intrinsics.ray(x, y + 1)));
        }
      }

      if (weights.data > 0.0) {
        const double factor = sd * ray.squaredNorm();
        const int r = add_row(ResidualKind::kData, factor * base(x, y));
        triplets.emplace_back(r, c, factor);
      }

      if (weights.smooth > 0.0) {
        if (x + 1 < w && column(x + 1, y) >= 0) {
          const int r = add_row(ResidualKind::kSmooth, 0.0);
          triplets.emplace_back(r, c, ss);
          triplets.emplace_back(r, column(x + 1, y), -ss);
        }
        if (y + 1 < h && column(x, y + 1) >= 0) {
          const int r = add_row(ResidualKind::kSmooth, 0.0);
          triplets.emplace_back(r, c, ss);
          triplets.emplace_back(r, column(x, y + 1), -ss);
        }
      }
    }
  }

  const auto cols = static_cast<Eigen::Index>(sys.unknown_pixels.size());
  sys.A.resize(static_cast<Eigen::Index>(rhs.size()), cols);
  sys.A.setFromTriplets(triplets.begin(), triplets.end());
  sys.b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  sys.base.resize(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    sys.base[j] = base[sys.unknown_pixels[static_cast<std::size_t>(j)]];
  }
  return sys;
}

double objective(const SparseSystem& system, const Eigen::VectorXd& values) {
  return (system.A * values - system.b).squaredNorm();
}

double normal_equation_residual(const SparseSystem& system, const Eigen::VectorXd& values) {
  const Eigen::VectorXd rhs = system.A.transpose() * system.b;
  const Eigen::VectorXd g = system.A.transpose() * (system.A * values - system.b);
  const double denom = rhs.norm();
  return denom > 0.0 ? g.norm() / denom : g.norm();
}

DepthSolution solve_depth(const SparseSystem& system, const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) {
    throw InvalidArgument("solve_depth: tolerance must be positive");
  }
  const Eigen::Index n = system.A.cols();
  if (n == 0) throw InvalidArgument("solve_depth: empty system");
  const int max_iter = options.max_iterations > 0
                           ? options.max_iterations
                           : static_cast<int>(std::ceil(10.0 * std::sqrt(static_cast<double>(n))));

  const Eigen::SparseMatrix<double> At = system.A.transpose();
  const Eigen::SparseMatrix<double> N = At * system.A;
  const Eigen::VectorXd rhs = At * system.b;
  const double rhs_norm = rhs.norm();
  const double scale = rhs_norm > 0.0 ? rhs_norm : 1.0;

  Eigen::VectorXd inv_diag = N.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    inv_diag[i] = inv_diag[i] > 0.0 ? 1.0 / inv_diag[i] : 1.0;
  }

  Eigen::VectorXd x = system.base;
  Eigen::VectorXd r = rhs - N * x;
  double rel = r.norm() / scale;
  int it = 0;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  while (rel > options.tolerance && it < max_iter) {
    const Eigen::VectorXd Np = N * p;
    const double pNp = p.dot(Np);
    if (!(pNp > 0.0)) break;  // p in the null space; nothing left to reduce
    const double alpha = rz / pNp;
    x += alpha * p;
    r -= alpha * Np;
    ++it;
    rel = r.norm() / scale;
    if (rel <= options.tolerance) {
      // Guard against drift of the recursive residual.
      r = rhs - N * x;
      rel = r.norm() / scale;
      if (rel <= options.tolerance) break;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  rel = (rhs - N * x).norm() / scale;
  if (rel > options.tolerance) {
    std::ostringstream os;
    os << "solve_depth: no convergence after " << it << " iterations (relative residual " << rel
       << ", tolerance " << options.tolerance << ")";
    throw NumericalError(os.str());
  }

  DepthSolution out;
  out.depth = DepthMap(system.width, system.height);
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::size_t pix = system.unknown_pixels[static_cast<std::size_t>(j)];
    out.depth.set(static_cast<int>(pix % static_cast<std::size_t>(system.width)),
                  static_cast<int>(pix / static_cast<std::size_t>(system.width)), x[j]);
  }
  out.values = std::move(x);
  out.iterations = it;
  out.relative_residual = rel;
  return out;
}

DepthSolution refine_depth(const NormalMap& normals, const DepthMap& base,
                           const CameraIntrinsics& intrinsics, const IntegrationWeights& weights,
                           const SolverOptions& options) {
  return solve_depth(assemble_system(normals, base, intrinsics, weights), options);
}

NormalMap chord_normals(const DepthMap& depth, const CameraIntrinsics& intrinsics) {
  if (intrinsics.width != depth.width() || intrinsics.height != depth.height()) {
    throw InvalidArgument("chord_normals: intrinsics size differs from the depth map");
  }
  const int w = depth.width();
  const int h = depth.height();
  auto ok = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && depth.valid(x, y); };
  auto point = [&](int x, int y) { return intrinsics.backproject(x, y, depth(x, y)); };
  auto chord = [&](int x, int y, int dx, int dy, Vec3& out) {
    if (ok(x + dx, y + dy)) {
      out = point(x + dx, y + dy) - point(x, y);
    } else if (ok(x - dx, y - dy)) {
      out = point(x, y) - point(x - dx, y - dy);
    } else {
      return false;
    }
    return true;
  };

  NormalMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth.valid(x, y)) continue;
      Vec3 tx, ty;
      if (!chord(x, y, 1, 0, tx) || !chord(x, y, 0, 1, ty)) continue;
      Vec3 c = ty.cross(tx);
      const double len = c.norm();
      if (len == 0.0) continue;
      c /= len;
      const Vec3 n = to_camera_frame(c);
      if (n.z() < 0.0) continue;
      out.set(x, y, n);
    }
  }
  return out;
}

double depth_rmse(const DepthMap& a, const DepthMap& b, const Mask* mask) {
  require_same_shape(a.image(), b.image(), "depth_rmse");
  if (mask != nullptr) require_same_shape(a.image(), *mask, "depth_rmse");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.image().size(); ++i) {
    if (!a.valid(i) || !b.valid(i) || (mask != nullptr && !(*mask)[i])) continue;
    const double d = a[i] - b[i];
    sum += d * d;
    ++count;
  }
  if (count == 0) throw InvalidArgument("depth_rmse: no pixel valid in both maps");
  return std::sqrt(sum / static_cast<double>(count));
}

}  // namespace polarshape::integrate
