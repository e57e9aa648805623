// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarshape/core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace polarshape {

namespace {

std::string pixel_str(int x, int y) {
  std::ostringstream os;
  os << "(" << x << ", " << y << ")";
  return os.str();
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw InvalidArgument("camera intrinsics: focal lengths must be positive and finite");
  }
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("camera intrinsics: image size must be positive");
  }
  if (!(px >= 0.0 && px < width) || !(py >= 0.0 && py < height)) {
    throw InvalidArgument("camera intrinsics: principal point outside the image");
  }
}

PolarizationImage::PolarizationImage(std::array<ScalarImage, 4> channels)
    : channels_(std::move(channels)) {
  for (int k = 1; k < 4; ++k) {
    require_same_shape(channels_[0], channels_[static_cast<std::size_t>(k)],
                       "polarization image channels");
  }
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& c = channels_[k];
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double v = c[i];
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        const int x = static_cast<int>(i % static_cast<std::size_t>(c.width()));
        const int y = static_cast<int>(i / static_cast<std::size_t>(c.width()));
        std::ostringstream os;
        os << "polarization image: channel " << k << " value " << v << " at pixel "
           << pixel_str(x, y) << " outside [0, 1]";
        throw InvalidArgument(os.str());
      }
    }
  }
}

void AngleMaps::validate() const {
  require_same_shape(azimuth, zenith, "angle maps");
  require_same_shape(azimuth, valid, "angle maps");
  for (std::size_t i = 0; i < azimuth.size(); ++i) {
    if (!valid[i]) continue;
    const double phi = azimuth[i];
    const double theta = zenith[i];
    if (!(phi >= 0.0 && phi < std::numbers::pi) ||
        !(theta >= 0.0 && theta <= std::numbers::pi / 2)) {
      throw InvalidArgument("angle maps: angle out of range at index " + std::to_string(i));
    }
  }
}

NormalMap::NormalMap(Image<Vec3> normals) : normals_(std::move(normals)) {
  for (int y = 0; y < normals_.height(); ++y) {
    for (int x = 0; x < normals_.width(); ++x) {
      set(x, y, normals_(x, y));
    }
  }
}

void NormalMap::set(int x, int y, const Vec3& n) {
  if (!n.isZero(0.0)) {
    if (!n.allFinite() || std::abs(n.norm() - 1.0) > kUnitTolerance) {
      throw InvalidArgument("normal map: non-unit normal at pixel " + pixel_str(x, y));
    }
    if (n.z() < 0.0) {
      throw InvalidArgument("normal map: rear-facing normal at pixel " + pixel_str(x, y));
    }
  }
  normals_(x, y) = n;
}

Mask NormalMap::foreground() const {
  Mask m(width(), height(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = is_foreground(i) ? 1 : 0;
  return m;
}

ProbMaps::ProbMaps(ScalarImage p0, ScalarImage p1, ScalarImage p2)
    : p_{std::move(p0), std::move(p1), std::move(p2)} {
  require_same_shape(p_[0], p_[1], "probability maps");
  require_same_shape(p_[0], p_[2], "probability maps");
  for (std::size_t i = 0; i < p_[0].size(); ++i) {
    double sum = 0.0;
    for (const auto& p : p_) {
      if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
        throw InvalidArgument("probability maps: value outside [0, 1] at index " +
                              std::to_string(i));
      }
      sum += p[i];
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw InvalidArgument("probability maps: probabilities do not sum to 1 at index " +
                            std::to_string(i));
    }
  }
}

LabelMap::LabelMap(Image<std::uint8_t> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] > 2) {
      throw InvalidArgument("label map: value " + std::to_string(labels_[i]) +
                            " at index " + std::to_string(i) + " not in {0, 1, 2}");
    }
  }
}

DepthMap::DepthMap(ScalarImage depth) : depth_(std::move(depth)) {
  for (std::size_t i = 0; i < depth_.size(); ++i) {
    if (!std::isfinite(depth_[i])) {
      throw InvalidArgument("depth map: non-finite depth at index " + std::to_string(i));
    }
  }
}

std::size_t DepthMap::valid_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < depth_.size(); ++i) n += valid(i) ? 1 : 0;
  return n;
}

void DepthMap::set(int x, int y, double z) {
  if (!std::isfinite(z)) {
    throw InvalidArgument("depth map: non-finite depth at pixel " + pixel_str(x, y));
  }
  depth_(x, y) = z;
}

Mask DepthMap::mask() const {
  Mask m(width(), height(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = valid(i) ? 1 : 0;
  return m;
}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const auto n = static_cast<long long>(vertices_.size());
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    if (!vertices_[v].allFinite()) {
      throw InvalidArgument("mesh: non-finite vertex " + std::to_string(v));
    }
  }
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    for (int idx : faces_[f]) {
      if (idx < 0 || idx >= n) {
        throw InvalidArgument("mesh: face " + std::to_string(f) + " references vertex " +
                              std::to_string(idx) + " out of range");
      }
    }
    const Vec3& a = vertices_[static_cast<std::size_t>(faces_[f][0])];
    const Vec3& b = vertices_[static_cast<std::size_t>(faces_[f][1])];
    const Vec3& c = vertices_[static_cast<std::size_t>(faces_[f][2])];
    if ((b - a).cross(c - a).norm() == 0.0) {
      throw InvalidArgument("mesh: face " + std::to_string(f) + " is degenerate");
    }
  }
}

void Skeleton::validate() const {
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (!joints[j].allFinite()) {
      throw InvalidArgument("skeleton: joint " + std::to_string(j) + " is not finite");
    }
  }
}

Vec3 normal_from_angles(double azimuth, double zenith) {
  if (!(azimuth >= 0.0 && azimuth < 2 * std::numbers::pi)) {
    throw InvalidArgument("normal_from_angles: azimuth outside [0, 2pi)");
  }
  if (!(zenith >= 0.0 && zenith <= std::numbers::pi / 2)) {
    throw InvalidArgument("normal_from_angles: zenith outside [0, pi/2]");
  }
  const double s = std::sin(zenith);
  return {s * std::cos(azimuth), s * std::sin(azimuth), std::cos(zenith)};
}

NormalAngles angles_from_normal(const Vec3& n) {
  if (!n.allFinite() || std::abs(n.norm() - 1.0) > NormalMap::kUnitTolerance) {
    throw InvalidArgument("angles_from_normal: normal is not unit length");
  }
  if (n.z() < 0.0) {
    throw InvalidArgument("angles_from_normal: normal faces away from the camera");
  }
  const double r = std::hypot(n.x(), n.y());
  NormalAngles a;
  a.zenith = std::atan2(r, n.z());
  if (r > 0.0) {
    double phi = std::atan2(n.y(), n.x());
    if (phi < 0.0) phi += 2 * std::numbers::pi;
    if (phi >= 2 * std::numbers::pi) phi = 0.0;
    a.azimuth = phi;
  }
  return a;
}

}  // namespace polarshape
