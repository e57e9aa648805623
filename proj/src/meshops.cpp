// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarshape/meshops.hpp"

#include "polarshape/kdtree.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

namespace polarshape::meshops {

namespace {

constexpr double kInsideEps = 1e-9;

double edge_fn(double ax, double ay, double bx, double by, double cx, double cy) {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

struct BilinearSample {
  double value = 0.0;
  bool ok = false;
};

BilinearSample sample_bilinear(const DepthMap& d, double u, double v) {
  const int w = d.width();
  const int h = d.height();
  if (!(u >= 0.0 && v >= 0.0 && u <= w - 1 && v <= h - 1)) return {};
  int x0 = static_cast<int>(std::floor(u));
  int y0 = static_cast<int>(std::floor(v));
  x0 = std::min(x0, std::max(w - 2, 0));
  y0 = std::min(y0, std::max(h - 2, 0));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = u - x0;
  const double fy = v - y0;
  if (!d.valid(x0, y0) || !d.valid(x1, y0) || !d.valid(x0, y1) || !d.valid(x1, y1)) return {};
  const double top = (1.0 - fx) * d(x0, y0) + fx * d(x1, y0);
  const double bottom = (1.0 - fx) * d(x0, y1) + fx * d(x1, y1);
  return {(1.0 - fy) * top + fy * bottom, true};
}

void require_non_degenerate(std::span<const Vec3> pts, const char* what) {
  if (pts.size() < 3) {
    throw InvalidArgument(std::string(what) + ": at least 3 points required");
  }
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  const Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const Vec3 ev = es.eigenvalues();  // ascending
  if (!(ev[2] > 0.0) || ev[1] <= 1e-12 * ev[2]) {
    throw InvalidArgument(std::string(what) + ": points are coincident or collinear");
  }
}

struct Frame {
  Vec3 mean;
  Mat3 axes;  // columns: principal directions, descending variance
  double spread = 0.0;  // mean squared distance to the centroid
};

Frame principal_frame(std::span<const Vec3> pts) {
  Frame f;
  f.mean = Vec3::Zero();
  for (const auto& p : pts) f.mean += p;
  f.mean /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) cov += (p - f.mean) * (p - f.mean).transpose();
  cov /= static_cast<double>(pts.size());
  const Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  f.axes.col(0) = es.eigenvectors().col(2);
  f.axes.col(1) = es.eigenvectors().col(1);
  f.axes.col(2) = es.eigenvectors().col(0);
  if (f.axes.determinant() < 0.0) f.axes.col(2) = -f.axes.col(2);
  f.spread = cov.trace();
  return f;
}

}  // namespace

DepthMap render_base_depth(const TriMesh& mesh, const CameraIntrinsics& intrinsics) {
  intrinsics.validate();
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    if (!(mesh.vertices()[v].z() > 0.0)) {
      throw InvalidArgument("render_base_depth: vertex " + std::to_string(v) +
                            " lies on or behind the camera plane");
    }
  }
  const int w = intrinsics.width;
  const int h = intrinsics.height;
  ScalarImage zbuf(w, h, std::numeric_limits<double>::infinity());

  for (const Face& f : mesh.faces()) {
    double u[3], v[3], inv_z[3];
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = mesh.vertices()[static_cast<std::size_t>(f[static_cast<std::size_t>(k)])];
      std::tie(u[k], v[k]) = intrinsics.project(p);
      inv_z[k] = 1.0 / p.z();
    }
    const double area = edge_fn(u[0], v[0], u[1], v[1], u[2], v[2]);
    if (std::abs(area) < 1e-14) continue;  // edge-on

    const int x_lo = std::max(0, static_cast<int>(std::ceil(std::min({u[0], u[1], u[2]}) - kInsideEps)));
    const int x_hi = std::min(w - 1, static_cast<int>(std::floor(std::max({u[0], u[1], u[2]}) + kInsideEps)));
    const int y_lo = std::max(0, static_cast<int>(std::ceil(std::min({v[0], v[1], v[2]}) - kInsideEps)));
    const int y_hi = std::min(h - 1, static_cast<int>(std::floor(std::max({v[0], v[1], v[2]}) + kInsideEps)));
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const double l0 = edge_fn(u[1], v[1], u[2], v[2], x, y) / area;
        const double l1 = edge_fn(u[2], v[2], u[0], v[0], x, y) / area;
        const double l2 = 1.0 - l0 - l1;
        if (l0 < -kInsideEps || l1 < -kInsideEps || l2 < -kInsideEps) continue;
        const double z = 1.0 / (l0 * inv_z[0] + l1 * inv_z[1] + l2 * inv_z[2]);
        if (z < zbuf(x, y)) zbuf(x, y) = z;
      }
    }
  }

  DepthMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (std::isfinite(zbuf(x, y))) out.set(x, y, zbuf(x, y));
    }
  }
  return out;
}

TriMesh upsample_mesh(const TriMesh& mesh, int levels) {
  if (levels < 0) throw InvalidArgument("upsample_mesh: levels must be non-negative");
  std::vector<Vec3> verts = mesh.vertices();
  std::vector<Face> faces = mesh.faces();
  for (int level = 0; level < levels; ++level) {
    std::map<std::pair<int, int>, int> incidence;
    for (const Face& f : faces) {
      for (int k = 0; k < 3; ++k) {
        const auto key = edge_key(f[static_cast<std::size_t>(k)], f[static_cast<std::size_t>((k + 1) % 3)]);
        if (++incidence[key] > 2) {
          throw InvalidArgument("upsample_mesh: edge (" + std::to_string(key.first) + ", " +
                                std::to_string(key.second) + ") has more than two faces");
        }
      }
    }
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = edge_key(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int id = static_cast<int>(verts.size());
      verts.push_back(0.5 * (verts[static_cast<std::size_t>(a)] + verts[static_cast<std::size_t>(b)]));
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const int a = f[0], b = f[1], c = f[2];
      const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      next.push_back({a, ab, ca});
      next.push_back({ab, b, bc});
      next.push_back({ca, bc, c});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  return TriMesh(std::move(verts), std::move(faces));
}

std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh) {
  std::vector<std::vector<int>> nbrs(mesh.vertex_count());
  for (const Face& f : mesh.faces()) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[static_cast<std::size_t>(k)];
      const int b = f[static_cast<std::size_t>((k + 1) % 3)];
      nbrs[static_cast<std::size_t>(a)].push_back(b);
      nbrs[static_cast<std::size_t>(b)].push_back(a);
    }
  }
  for (auto& n : nbrs) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return nbrs;
}

TriMesh deform_to_depth(const TriMesh& mesh, const DepthMap& refined, const DepthMap& base,
                        const CameraIntrinsics& intrinsics, const DeformOptions& options) {
  require_same_shape(refined.image(), base.image(), "deform_to_depth");
  intrinsics.validate();
  if (intrinsics.width != base.width() || intrinsics.height != base.height()) {
    throw InvalidArgument("deform_to_depth: intrinsics size differs from the depth maps");
  }
  const auto& verts = mesh.vertices();
  const std::size_t n = verts.size();
  std::vector<Vec3> displacement(n, Vec3::Zero());
  std::vector<char> visible(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = verts[i];
    if (!(p.z() > 0.0)) continue;
    const auto [u, v] = intrinsics.project(p);
    const auto b = sample_bilinear(base, u, v);
    const auto r = sample_bilinear(refined, u, v);
    if (!b.ok || !r.ok) continue;
    if (std::abs(p.z() - b.value) > options.visibility_tolerance) continue;
    visible[i] = 1;
    const double dz = options.step * (r.value - b.value);
    displacement[i] = p * (dz / p.z());
  }

  const auto nbrs = vertex_neighbors(mesh);
  std::vector<Vec3> out = verts;
  for (std::size_t i = 0; i < n; ++i) {
    if (visible[i]) {
      out[i] += displacement[i];
      continue;
    }
    Vec3 sum = Vec3::Zero();
    int count = 0;
    for (int j : nbrs[i]) {
      if (!visible[static_cast<std::size_t>(j)]) continue;
      sum += displacement[static_cast<std::size_t>(j)];
      ++count;
    }
    if (count > 0) out[i] += sum / count;
  }
  return TriMesh(std::move(out), mesh.faces());
}

Similarity umeyama(std::span<const Vec3> source, std::span<const Vec3> target) {
  if (source.size() != target.size()) {
    throw InvalidArgument("umeyama: point sets differ in size");
  }
  require_non_degenerate(source, "umeyama");
  const double count = static_cast<double>(source.size());
  Vec3 ms = Vec3::Zero(), mt = Vec3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    ms += source[i];
    mt += target[i];
  }
  ms /= count;
  mt /= count;
  Mat3 sigma = Mat3::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Vec3 ds = source[i] - ms;
    sigma += (target[i] - mt) * ds.transpose();
    var_s += ds.squaredNorm();
  }
  sigma /= count;
  var_s /= count;

  const Eigen::JacobiSVD<Mat3> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 d = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) d[2] = -1.0;
  Similarity s;
  s.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  s.scale = svd.singularValues().dot(d) / var_s;
  s.translation = mt - s.scale * s.rotation * ms;
  return s;
}

IcpResult scaled_rigid_icp_from(std::span<const Vec3> source, std::span<const Vec3> target,
                                const Similarity& initial, const IcpOptions& options) {
  require_non_degenerate(source, "scaled_rigid_icp: source");
  require_non_degenerate(target, "scaled_rigid_icp: target");
  const KdTree tree(target);
  IcpResult result;
  result.transform = initial;
  std::vector<Vec3> matched(source.size());
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iterations; ++it) {
    double sq = 0.0;
    for (std::size_t i = 0; i < source.size(); ++i) {
      const auto m = tree.nearest(result.transform.apply(source[i]));
      matched[i] = target[m.index];
      sq += m.squared_distance;
    }
    const double rms = std::sqrt(sq / static_cast<double>(source.size()));
    result.residual_history.push_back(rms);
    if (previous - rms < options.tolerance) break;
    previous = rms;
    result.transform = umeyama(source, matched);
    result.iterations = it + 1;
  }
  result.aligned.reserve(source.size());
  for (const auto& p : source) result.aligned.push_back(result.transform.apply(p));
  return result;
}

IcpResult scaled_rigid_icp(std::span<const Vec3> source, std::span<const Vec3> target,
                           const IcpOptions& options) {
  require_non_degenerate(source, "scaled_rigid_icp: source");
  require_non_degenerate(target, "scaled_rigid_icp: target");

  std::vector<Similarity> starts{Similarity{}};
  const Frame fs = principal_frame(source);
  const Frame ft = principal_frame(target);
  const double scale = std::sqrt(ft.spread / fs.spread);
  for (const Vec3& signs : {Vec3(1, 1, 1), Vec3(-1, -1, 1), Vec3(-1, 1, -1), Vec3(1, -1, -1)}) {
    Similarity s;
    s.rotation = ft.axes * signs.asDiagonal() * fs.axes.transpose();
    s.scale = scale;
    s.translation = ft.mean - scale * s.rotation * fs.mean;
    starts.push_back(s);
  }

  IcpResult best;
  double best_rms = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    IcpResult r = scaled_rigid_icp_from(source, target, start, options);
    const double rms = r.residual_history.empty() ? std::numeric_limits<double>::infinity()
                                                  : r.residual_history.back();
    if (rms < best_rms) {
      best_rms = rms;
      best = std::move(r);
    }
  }
  return best;
}

double surface_error(std::span<const Vec3> pred, std::span<const Vec3> truth) {
  if (pred.empty() || truth.empty()) throw InvalidArgument("surface_error: empty vertex set");
  const KdTree tree(truth);
  double sum = 0.0;
  for (const auto& p : pred) {
    const auto m = tree.nearest(p);
    sum += (p - truth[m.index]).norm();
  }
  return 1000.0 * sum / static_cast<double>(pred.size());
}

double surface_error(const TriMesh& pred, const TriMesh& truth) {
  return surface_error(std::span<const Vec3>(pred.vertices()),
                       std::span<const Vec3>(truth.vertices()));
}

JointSubset JointSubset::all24() {
  JointSubset s;
  s.joints.resize(Skeleton::kJointCount);
  std::iota(s.joints.begin(), s.joints.end(), 0);
  return s;
}

JointSubset JointSubset::body20() {
  static constexpr int kRemoved[] = {10, 11, 22, 23};
  return excluding(kRemoved);
}

JointSubset JointSubset::excluding(std::span<const int> removed) {
  for (int j : removed) {
    if (j < 0 || j >= static_cast<int>(Skeleton::kJointCount)) {
      throw InvalidArgument("joint subset: removed index " + std::to_string(j) + " out of range");
    }
  }
  JointSubset s;
  for (int j = 0; j < static_cast<int>(Skeleton::kJointCount); ++j) {
    if (std::find(removed.begin(), removed.end(), j) == removed.end()) s.joints.push_back(j);
  }
  return s;
}

double mpjpe(const Skeleton& pred, const Skeleton& truth, const JointSubset& subset) {
  pred.validate();
  truth.validate();
  if (subset.joints.empty()) throw InvalidArgument("mpjpe: empty joint subset");
  double sum = 0.0;
  for (int j : subset.joints) {
    if (j < 0 || j >= static_cast<int>(Skeleton::kJointCount)) {
      throw InvalidArgument("mpjpe: joint index " + std::to_string(j) + " out of range");
    }
    sum += 1000.0 * (pred.joints[static_cast<std::size_t>(j)] -
                     truth.joints[static_cast<std::size_t>(j)]).norm();
  }
  return sum / static_cast<double>(subset.joints.size());
}

double param_loss(const BodyParams& pred, const Skeleton& pred_joints, const BodyParams& truth,
                  const Skeleton& truth_joints, const ParamLossWeights& weights) {
  auto sq = [](const auto& a, const auto& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
  };
  double joints = 0.0;
  for (std::size_t j = 0; j < Skeleton::kJointCount; ++j) {
    joints += (pred_joints.joints[j] - truth_joints.joints[j]).squaredNorm();
  }
  return weights.shape * sq(pred.shape, truth.shape) + weights.pose * sq(pred.pose, truth.pose) +
         weights.translation * sq(pred.translation, truth.translation) + weights.joints * joints;
}

TriMesh make_icosphere(const Vec3& center, double radius, int levels) {
  if (!(radius > 0.0)) throw InvalidArgument("make_icosphere: radius must be positive");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& p : v) p.normalize();
  TriMesh mesh = upsample_mesh(TriMesh(std::move(v), std::move(f)), levels);
  std::vector<Vec3> verts = mesh.vertices();
  for (auto& p : verts) p = center + radius * p.normalized();
  return TriMesh(std::move(verts), mesh.faces());
}

}  // namespace polarshape::meshops
