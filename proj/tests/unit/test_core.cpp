// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarshape/core.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace polarshape;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("image indexing is row-major with x as column") {
  Image<int> img(3, 2, 0);
  img(2, 1) = 7;
  CHECK(img[5] == 7);
  CHECK(img.index(1, 1) == 4);
  CHECK(img.contains(2, 1));
  CHECK_FALSE(img.contains(3, 0));
  CHECK_THROWS_AS(Image<int>(-1, 2), InvalidArgument);
}

TEST_CASE("grids reject mismatched dimensions") {
  std::array<ScalarImage, 4> ch{ScalarImage(4, 4), ScalarImage(4, 4), ScalarImage(4, 3),
                                ScalarImage(4, 4)};
  CHECK_THROWS_AS(PolarizationImage{ch}, InvalidArgument);
  CHECK_THROWS_AS(ProbMaps(ScalarImage(2, 2, 1.0), ScalarImage(2, 2), ScalarImage(3, 2)),
                  InvalidArgument);
  CHECK_THROWS_AS(require_same_shape(ScalarImage(2, 2), Mask(2, 3), "test"), InvalidArgument);
}

TEST_CASE("polarization intensities must lie in [0, 1]") {
  std::array<ScalarImage, 4> ch{ScalarImage(2, 2, 0.5), ScalarImage(2, 2, 0.5),
                                ScalarImage(2, 2, 0.5), ScalarImage(2, 2, 0.5)};
  CHECK_NOTHROW(PolarizationImage{ch});
  ch[1](1, 1) = 1.01;
  CHECK_THROWS_AS(PolarizationImage{ch}, InvalidArgument);
}

TEST_CASE("normal map validation") {
  NormalMap m(2, 2);
  CHECK_FALSE(m.is_foreground(0, 0));
  m.set(0, 0, Vec3(0, 0, 1));
  CHECK(m.is_foreground(0, 0));
  CHECK_THROWS_AS(m.set(1, 0, Vec3(0, 0, 0.9)), InvalidArgument);
  CHECK_THROWS_AS(m.set(1, 0, Vec3(0, 0, -1)), InvalidArgument);
  m.set(1, 1, Vec3(1, 0, 0));  // grazing is allowed
  const Mask fg = m.foreground();
  CHECK(fg(0, 0) == 1);
  CHECK(fg(1, 0) == 0);
  CHECK(fg(1, 1) == 1);

  CHECK(to_camera_frame(Vec3(0.1, 0.2, 0.3)).isApprox(Vec3(0.1, 0.2, -0.3)));
}

TEST_CASE("probability maps must sum to one") {
  CHECK_NOTHROW(ProbMaps(ScalarImage(2, 2, 0.2), ScalarImage(2, 2, 0.3), ScalarImage(2, 2, 0.5)));
  CHECK_THROWS_AS(
      ProbMaps(ScalarImage(2, 2, 0.2), ScalarImage(2, 2, 0.3), ScalarImage(2, 2, 0.4)),
      InvalidArgument);
  CHECK_THROWS_AS(
      ProbMaps(ScalarImage(2, 2, -0.1), ScalarImage(2, 2, 0.6), ScalarImage(2, 2, 0.5)),
      InvalidArgument);
}

TEST_CASE("label maps hold only three categories") {
  Image<std::uint8_t> raw(2, 1, 2);
  CHECK_NOTHROW(LabelMap{raw});
  raw(0, 0) = 3;
  CHECK_THROWS_AS(LabelMap{raw}, InvalidArgument);
}

TEST_CASE("depth map validity") {
  ScalarImage d(3, 1, 2.0);
  d(1, 0) = 0.0;
  DepthMap depth(d);
  CHECK(depth.valid_count() == 2);
  CHECK_FALSE(depth.valid(1, 0));
  CHECK(depth.mask()(1, 0) == 0);
  d(2, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(DepthMap{d}, InvalidArgument);
}

TEST_CASE("triangle mesh validation") {
  const std::vector<Vec3> v{{0, 0, 1}, {1, 0, 1}, {0, 1, 1}};
  CHECK_NOTHROW(TriMesh(v, {{0, 1, 2}}));
  CHECK_THROWS_AS(TriMesh(v, {{0, 1, 3}}), InvalidArgument);
  CHECK_THROWS_AS(TriMesh(v, {{0, 1, 1}}), InvalidArgument);
  const std::vector<Vec3> collinear{{0, 0, 1}, {1, 0, 1}, {2, 0, 1}};
  CHECK_THROWS_AS(TriMesh(collinear, {{0, 1, 2}}), InvalidArgument);
}

TEST_CASE("camera projection inverts back-projection") {
  CameraIntrinsics k{500, 480, 320, 240, 640, 480};
  CHECK_NOTHROW(k.validate());
  const Vec3 p = k.backproject(100.5, 37.25, 2.5);
  const auto [u, v] = k.project(p);
  CHECK(u == doctest::Approx(100.5).epsilon(1e-12));
  CHECK(v == doctest::Approx(37.25).epsilon(1e-12));
  CHECK(p.z() == 2.5);

  CameraIntrinsics bad = k;
  bad.fy = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("normal_from_angles examples") {
  CHECK(normal_from_angles(0.0, kPi / 2).isApprox(Vec3(1, 0, 0)));
  CHECK(normal_from_angles(1.3, 0.0).isApprox(Vec3(0, 0, 1)));
  const Vec3 n = normal_from_angles(kPi / 4, kPi / 3);
  const double s = std::sqrt(6.0) / 4.0;
  CHECK(n.x() == doctest::Approx(s));
  CHECK(n.y() == doctest::Approx(s));
  CHECK(n.z() == doctest::Approx(0.5));
  CHECK_THROWS_AS(normal_from_angles(2 * kPi, 0.1), InvalidArgument);
  CHECK_THROWS_AS(normal_from_angles(0.0, kPi / 2 + 1e-9), InvalidArgument);
}

TEST_CASE("angles round trip through normals") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> az(0.0, 2 * kPi);
  std::uniform_real_distribution<double> zen(1e-3, kPi / 2);
  for (int i = 0; i < 1000; ++i) {
    const double a = az(gen);
    const double z = zen(gen);
    const auto back = angles_from_normal(normal_from_angles(a, z));
    CHECK(back.zenith == doctest::Approx(z).epsilon(1e-12));
    const double da = std::remainder(back.azimuth - a, 2 * kPi);
    CHECK(std::abs(da) < 1e-10);
  }
  CHECK(angles_from_normal(Vec3(0, 0, 1)).azimuth == 0.0);
  CHECK_THROWS_AS(angles_from_normal(Vec3(0, 0, 2)), InvalidArgument);
}

TEST_CASE("skeleton rejects non-finite joints") {
  Skeleton s;
  CHECK_NOTHROW(s.validate());
  s.joints[5].x() = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
}
