// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "polarshape/core.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace polarshape::forward {

/// Refractive index of the reflecting material (dimensionless, > 1).
class RefractiveIndex {
 public:
  static constexpr double kDefault = 1.5;

  constexpr RefractiveIndex() = default;
  explicit RefractiveIndex(double n);
  constexpr double value() const { return n_; }

 private:
  double n_ = kDefault;
};

/// Diffuse degree of polarization as a function of zenith angle:
///
///   rho = (n - 1/n)^2 sin^2(t) /
///         (2 + 2n^2 - (n + 1/n)^2 sin^2(t) + 4 cos(t) sqrt(n^2 - sin^2(t)))
///
/// Strictly increasing on [0, pi/2], zero at normal incidence.
double dop_from_zenith(double zenith, RefractiveIndex n = {});

/// Largest attainable diffuse DoP, reached at grazing incidence.
double max_dop(RefractiveIndex n = {});

/// Intensities behind the four polarizers for one pixel with unpolarized
/// gray level `gray` = I(0), azimuth `azimuth` and DoP `rho`. The total
/// S = Imax + Imin solves I(0) = S/2 (1 + rho cos 2phi). Results are not clamped.
std::array<double, 4> synthesize_pixel(double gray, double azimuth, double rho);

/// Renders the four polarizer channels from a normal map and a gray image.
/// Background normals produce zeros; values are clamped to [0, 1].
PolarizationImage synthesize_polarization(const NormalMap& normals, const ScalarImage& gray,
                                          const CameraIntrinsics& intrinsics,
                                          RefractiveIndex n = {});

/// Adds N(0, sigma^2) to every channel value (only on `foreground` pixels when
/// a mask is given) and clamps to [0, 1]. Row y draws from its own generator
/// seeded by (seed, y).
PolarizationImage add_noise(const PolarizationImage& img, double sigma, std::uint64_t seed,
                            const Mask* foreground = nullptr);

/// 8-bit quantization: v -> round(v * 255) / 255, ties away from zero.
double quantize_8bit(double v);
std::uint8_t to_byte(double v);
PolarizationImage quantize(const PolarizationImage& img);

/// add_noise followed by quantize.
PolarizationImage add_noise_and_quantize(const PolarizationImage& img, double sigma,
                                         std::uint64_t seed, const Mask* foreground = nullptr);

enum class SceneKind { kSphere, kTiltedPlane, kSinusoidalHeightfield };

std::string_view to_string(SceneKind kind);
/// Accepts "sphere", "plane" / "tilted-plane", "heightfield" / "sinusoidal-heightfield".
SceneKind scene_kind_from_string(std::string_view name);

/// Analytic test scene. Only the fields relevant to `kind` are used.
struct SyntheticScene {
  SceneKind kind = SceneKind::kSphere;
  // sphere
  Vec3 center{0.0, 0.0, 3.0};
  double radius = 1.0;
  // plane: passes through (0, 0, distance) with normal-map-frame normal `plane_normal`
  // heightfield: Z = distance + amplitude * sin(2 pi f X) * sin(2 pi f Y)
  double distance = 2.0;
  Vec3 plane_normal{0.0, 0.0, 1.0};
  double amplitude = 0.0;
  double frequency = 1.0;  // cycles per meter
  double albedo = 0.4;

  void validate() const;
};

struct RenderedScene {
  DepthMap depth;
  NormalMap normals;
  ScalarImage gray;
};

/// Ray-casts the analytic scene through every pixel center.
RenderedScene render_scene(const SyntheticScene& scene, const CameraIntrinsics& intrinsics);

/// Normals from a depth map by central differences of the back-projected
/// surface, falling back to one-sided differences at validity boundaries.
NormalMap normals_from_depth(const DepthMap& depth, const CameraIntrinsics& intrinsics);

/// Mask-aware Gaussian blur of the valid depth pixels (sigma in pixels).
DepthMap smooth_depth(const DepthMap& depth, double sigma_px);

}  // namespace polarshape::forward
