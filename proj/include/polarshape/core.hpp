// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polarshape {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (range, shape, validity).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Dense row-major 2D grid. Pixel (x, y) has x as column, y as row.
template <class T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, const T& fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw InvalidArgument("image dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  template <class U>
  bool same_shape(const Image<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ScalarImage = Image<double>;
using Mask = Image<std::uint8_t>;

template <class A, class B>
void require_same_shape(const Image<A>& a, const Image<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                          " vs " + std::to_string(b.width()) + "x" +
                          std::to_string(b.height()) + ")");
  }
}

/// Pinhole camera: u = fx * X / Z + px, v = fy * Y / Z + py (pixels).
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double px = 0.0;
  double py = 0.0;
  int width = 0;
  int height = 0;

  /// Throws InvalidArgument unless fx, fy > 0 and the principal point is inside the image.
  void validate() const;

  /// Unnormalized viewing ray ((x - px) / fx, (y - py) / fy, 1) through pixel (x, y).
  Vec3 ray(double x, double y) const {
    return {(x - px) / fx, (y - py) / fy, 1.0};
  }
  /// Back-projects pixel (x, y) at depth z (meters) into the camera frame.
  Vec3 backproject(double x, double y, double z) const { return z * ray(x, y); }
  /// Projects a camera-frame point (z > 0) to pixel coordinates.
  std::pair<double, double> project(const Vec3& p) const {
    return {fx * p.x() / p.z() + px, fy * p.y() / p.z() + py};
  }
};

/// Four-channel polarization stack, channel k holding the intensity seen
/// through a linear polarizer at k * 45 degrees. Intensities lie in [0, 1].
class PolarizationImage {
 public:
  static constexpr std::array<double, 4> kPolarizerAnglesDeg = {0.0, 45.0, 90.0, 135.0};

  PolarizationImage() = default;
  explicit PolarizationImage(std::array<ScalarImage, 4> channels);

  int width() const { return channels_[0].width(); }
  int height() const { return channels_[0].height(); }
  const ScalarImage& channel(int k) const { return channels_.at(static_cast<std::size_t>(k)); }
  const std::array<ScalarImage, 4>& channels() const { return channels_; }

  std::array<double, 4> at(int x, int y) const {
    return {channels_[0](x, y), channels_[1](x, y), channels_[2](x, y), channels_[3](x, y)};
  }

 private:
  std::array<ScalarImage, 4> channels_;
};

struct StokesMaps {
  ScalarImage s0;  // (I0 + I45 + I90 + I135) / 2
  ScalarImage s1;  // I0 - I90
  ScalarImage s2;  // I45 - I135
};

/// Per-pixel degree of polarization with a validity mask.
struct DoPMap {
  ScalarImage rho;
  Mask valid;
};

/// Azimuth in [0, pi) and zenith in [0, pi/2] wherever `valid` is set.
struct AngleMaps {
  ScalarImage azimuth;
  ScalarImage zenith;
  Mask valid;

  void validate() const;
};

/// Surface normals in the viewer-facing frame: x right, y down (image axes),
/// z toward the camera, so nz = cos(zenith) >= 0. The zero vector marks
/// background. Relative to the camera frame (z forward) the outward normal is
/// (nx, ny, -nz); see to_camera_frame().
class NormalMap {
 public:
  static constexpr double kUnitTolerance = 1e-6;

  NormalMap() = default;
  NormalMap(int width, int height) : normals_(width, height, Vec3::Zero()) {}
  /// Validates unit length (or zero) and nz >= 0 for every pixel.
  explicit NormalMap(Image<Vec3> normals);

  int width() const { return normals_.width(); }
  int height() const { return normals_.height(); }
  const Vec3& operator()(int x, int y) const { return normals_(x, y); }
  const Vec3& operator[](std::size_t i) const { return normals_[i]; }
  bool is_foreground(int x, int y) const { return !normals_(x, y).isZero(0.0); }
  bool is_foreground(std::size_t i) const { return !normals_[i].isZero(0.0); }
  const Image<Vec3>& image() const { return normals_; }

  /// Sets one pixel; `n` must be zero or a camera-facing unit vector.
  void set(int x, int y, const Vec3& n);

  Mask foreground() const;

 private:
  Image<Vec3> normals_;
};

/// Normal map stored frame -> camera frame (z forward). Involutive.
inline Vec3 to_camera_frame(const Vec3& n) { return {n.x(), n.y(), -n.z()}; }

/// Probability-weighted normals whose magnitude is the foreground soft mask.
struct FusedNormalMap {
  Image<Vec3> normals;
};

/// Per-pixel three-way class probabilities: background, n1, n2.
class ProbMaps {
 public:
  static constexpr double kSumTolerance = 1e-6;

  ProbMaps() = default;
  ProbMaps(ScalarImage p0, ScalarImage p1, ScalarImage p2);

  int width() const { return p_[0].width(); }
  int height() const { return p_[0].height(); }
  const ScalarImage& p(int k) const { return p_.at(static_cast<std::size_t>(k)); }
  double operator()(int k, std::size_t i) const { return p_[static_cast<std::size_t>(k)][i]; }

 private:
  std::array<ScalarImage, 3> p_;
};

enum class Category : std::uint8_t { kBackground = 0, kFirst = 1, kSecond = 2 };

/// Per-pixel category with values restricted to {0, 1, 2}.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int width, int height) : labels_(width, height, 0) {}
  explicit LabelMap(Image<std::uint8_t> labels);

  int width() const { return labels_.width(); }
  int height() const { return labels_.height(); }
  std::uint8_t operator()(int x, int y) const { return labels_(x, y); }
  std::uint8_t operator[](std::size_t i) const { return labels_[i]; }
  void set(int x, int y, Category c) { labels_(x, y) = static_cast<std::uint8_t>(c); }
  const Image<std::uint8_t>& image() const { return labels_; }

 private:
  Image<std::uint8_t> labels_;
};

/// Metric depth along the optical axis (meters). Depth <= 0 is invalid.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height) : depth_(width, height, 0.0) {}
  /// Rejects non-finite entries.
  explicit DepthMap(ScalarImage depth);

  int width() const { return depth_.width(); }
  int height() const { return depth_.height(); }
  double operator()(int x, int y) const { return depth_(x, y); }
  double operator[](std::size_t i) const { return depth_[i]; }
  bool valid(int x, int y) const { return depth_(x, y) > 0.0; }
  bool valid(std::size_t i) const { return depth_[i] > 0.0; }
  std::size_t valid_count() const;
  void set(int x, int y, double z);
  const ScalarImage& image() const { return depth_; }
  Mask mask() const;

 private:
  ScalarImage depth_;
};

using Face = std::array<int, 3>;

/// Indexed triangle mesh (meters). Construction rejects out-of-range indices
/// and zero-area triangles.
class TriMesh {
 public:
  TriMesh() = default;
  TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t face_count() const { return faces_.size(); }

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
};

/// 85-dimensional body parameter vector: shape (10), pose (72), translation (3, meters).
struct BodyParams {
  static constexpr std::size_t kShapeDim = 10;
  static constexpr std::size_t kPoseDim = 72;
  static constexpr std::size_t kTranslationDim = 3;
  static constexpr std::size_t kDim = kShapeDim + kPoseDim + kTranslationDim;

  std::array<double, kShapeDim> shape{};
  std::array<double, kPoseDim> pose{};
  std::array<double, kTranslationDim> translation{};
};

/// 24 body joints in meters.
struct Skeleton {
  static constexpr std::size_t kJointCount = 24;
  std::array<Vec3, kJointCount> joints;

  Skeleton() { joints.fill(Vec3::Zero()); }
  void validate() const;
};

/// n = (sin(zenith) cos(azimuth), sin(zenith) sin(azimuth), cos(zenith)).
/// Requires azimuth in [0, 2pi) and zenith in [0, pi/2].
Vec3 normal_from_angles(double azimuth, double zenith);

struct NormalAngles {
  double azimuth = 0.0;  // [0, 2pi); 0 at the pole
  double zenith = 0.0;   // [0, pi/2]
};

/// Inverse of normal_from_angles. Rejects non-unit or rear-facing vectors.
NormalAngles angles_from_normal(const Vec3& n);

}  // namespace polarshape
