// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarshape/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

namespace polarshape::forward {

namespace {

constexpr double kPi = std::numbers::pi;
// 1 + rho cos(2 phi) at or below this would need S outside [0, 2 I(0) / eps].
constexpr double kSynthesisEpsilon = 1e-9;

double deg2rad(double d) { return d * kPi / 180.0; }

Vec3 stored_from_camera(const Vec3& outward) {
  return Vec3(outward.x(), outward.y(), -outward.z()).normalized();
}

}  // namespace

RefractiveIndex::RefractiveIndex(double n) : n_(n) {
  if (!(n > 1.0) || !std::isfinite(n)) {
    throw InvalidArgument("refractive index must be finite and greater than 1");
  }
}

double dop_from_zenith(double zenith, RefractiveIndex index) {
  if (!(zenith >= 0.0 && zenith <= kPi / 2)) {
    throw InvalidArgument("dop_from_zenith: zenith outside [0, pi/2]");
  }
  const double n = index.value();
  const double s = std::sin(zenith);
  const double s2 = s * s;
  const double a = (n - 1.0 / n) * (n - 1.0 / n);
  const double b = (n + 1.0 / n) * (n + 1.0 / n);
  const double denom =
      2.0 + 2.0 * n * n - b * s2 + 4.0 * std::cos(zenith) * std::sqrt(n * n - s2);
  return a * s2 / denom;
}

double max_dop(RefractiveIndex n) { return dop_from_zenith(kPi / 2, n); }

std::array<double, 4> synthesize_pixel(double gray, double azimuth, double rho) {
  const double denom = 1.0 + rho * std::cos(2.0 * azimuth);
  if (denom <= kSynthesisEpsilon) {
    throw NumericalError("synthesize_pixel: 1 + rho cos(2 phi) is not positive");
  }
  const double total = 2.0 * gray / denom;
  std::array<double, 4> out{};
  out[0] = gray;
  for (std::size_t k = 1; k < 4; ++k) {
    const double pol = deg2rad(PolarizationImage::kPolarizerAnglesDeg[k]);
    out[k] = 0.5 * total + 0.5 * rho * total * std::cos(2.0 * (pol - azimuth));
  }
  return out;
}

PolarizationImage synthesize_polarization(const NormalMap& normals, const ScalarImage& gray,
                                          const CameraIntrinsics& intrinsics,
                                          RefractiveIndex n) {
  require_same_shape(normals.image(), gray, "synthesize_polarization");
  if (intrinsics.width != normals.width() || intrinsics.height != normals.height()) {
    throw InvalidArgument("synthesize_polarization: intrinsics size differs from the normal map");
  }
  const int w = normals.width();
  const int h = normals.height();
  std::array<ScalarImage, 4> ch{ScalarImage(w, h), ScalarImage(w, h), ScalarImage(w, h),
                                ScalarImage(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!normals.is_foreground(x, y)) continue;
      const auto angles = angles_from_normal(normals(x, y));
      const double rho = dop_from_zenith(angles.zenith, n);
      std::array<double, 4> v{};
      try {
        v = synthesize_pixel(gray(x, y), angles.azimuth, rho);
      } catch (const NumericalError&) {
        std::ostringstream os;
        os << "synthesize_polarization: degenerate intensity total at pixel (" << x << ", "
           << y << ")";
        throw NumericalError(os.str());
      }
      for (std::size_t k = 0; k < 4; ++k) ch[k](x, y) = std::clamp(v[k], 0.0, 1.0);
    }
  }
  return PolarizationImage(std::move(ch));
}

PolarizationImage add_noise(const PolarizationImage& img, double sigma, std::uint64_t seed,
                            const Mask* foreground) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("add_noise: sigma must be finite and non-negative");
  }
  if (foreground != nullptr) require_same_shape(img.channel(0), *foreground, "add_noise");
  std::array<ScalarImage, 4> ch = img.channels();
  if (sigma == 0.0) return PolarizationImage(std::move(ch));

  const int w = img.width();
  for (int y = 0; y < img.height(); ++y) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(y)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> noise(0.0, sigma);
    for (int x = 0; x < w; ++x) {
      const bool apply = foreground == nullptr || (*foreground)(x, y) != 0;
      for (auto& c : ch) {
        const double e = noise(gen);
        if (apply) c(x, y) = std::clamp(c(x, y) + e, 0.0, 1.0);
      }
    }
  }
  return PolarizationImage(std::move(ch));
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::round(std::clamp(v, 0.0, 1.0) * 255.0));
}

double quantize_8bit(double v) { return to_byte(v) / 255.0; }

PolarizationImage quantize(const PolarizationImage& img) {
  std::array<ScalarImage, 4> ch = img.channels();
  for (auto& c : ch) {
    for (auto& v : c.pixels()) v = quantize_8bit(v);
  }
  return PolarizationImage(std::move(ch));
}

PolarizationImage add_noise_and_quantize(const PolarizationImage& img, double sigma,
                                         std::uint64_t seed, const Mask* foreground) {
  return quantize(add_noise(img, sigma, seed, foreground));
}

std::string_view to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::kSphere:
      return "sphere";
    case SceneKind::kTiltedPlane:
      return "tilted-plane";
    case SceneKind::kSinusoidalHeightfield:
      return "sinusoidal-heightfield";
  }
  return "unknown";
}

SceneKind scene_kind_from_string(std::string_view name) {
  if (name == "sphere") return SceneKind::kSphere;
  if (name == "plane" || name == "tilted-plane") return SceneKind::kTiltedPlane;
  if (name == "heightfield" || name == "sinusoidal-heightfield") {
    return SceneKind::kSinusoidalHeightfield;
  }
  throw InvalidArgument("unknown scene kind '" + std::string(name) + "'");
}

void SyntheticScene::validate() const {
  if (!(albedo > 0.0 && albedo <= 1.0)) {
    throw InvalidArgument("scene: albedo must lie in (0, 1]");
  }
  switch (kind) {
    case SceneKind::kSphere:
      if (!(radius > 0.0)) throw InvalidArgument("scene: radius must be positive");
      if (!center.allFinite()) throw InvalidArgument("scene: sphere center not finite");
      break;
    case SceneKind::kTiltedPlane:
      if (!(distance > 0.0)) throw InvalidArgument("scene: plane distance must be positive");
      if (std::abs(plane_normal.norm() - 1.0) > 1e-9 || plane_normal.z() <= 0.0) {
        throw InvalidArgument("scene: plane normal must be a unit vector with nz > 0");
      }
      break;
    case SceneKind::kSinusoidalHeightfield:
      if (!(distance > 0.0)) throw InvalidArgument("scene: heightfield distance must be positive");
      if (!(amplitude >= 0.0)) throw InvalidArgument("scene: amplitude must be non-negative");
      if (!(frequency >= 0.0)) throw InvalidArgument("scene: frequency must be non-negative");
      break;
  }
}

namespace {

struct Hit {
  double depth = 0.0;
  Vec3 normal = Vec3::Zero();  // normal-map frame
};

std::optional<Hit> intersect_sphere(const SyntheticScene& s, const Vec3& r) {
  const double a = r.squaredNorm();
  const double b = r.dot(s.center);
  const double c = s.center.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double t = (b - std::sqrt(disc)) / a;
  if (!(t > 0.0)) return std::nullopt;
  const Vec3 outward = (t * r - s.center) / s.radius;
  if (outward.z() > 0.0) return std::nullopt;  // limb seen from behind the z = 0 plane
  return Hit{t, stored_from_camera(outward)};
}

std::optional<Hit> intersect_plane(const SyntheticScene& s, const Vec3& r) {
  const Vec3 outward = to_camera_frame(s.plane_normal);
  const double denom = outward.dot(r);
  if (denom >= 0.0) return std::nullopt;
  const double t = outward.z() * s.distance / denom;
  if (!(t > 0.0) || !std::isfinite(t)) return std::nullopt;
  return Hit{t, s.plane_normal};
}

std::optional<Hit> intersect_heightfield(const SyntheticScene& s, const Vec3& r) {
  const double k = 2.0 * kPi * s.frequency;
  auto height = [&](double t, double& dt, double& hx, double& hy) {
    const double X = t * r.x();
    const double Y = t * r.y();
    const double h = s.amplitude * std::sin(k * X) * std::sin(k * Y);
    hx = s.amplitude * k * std::cos(k * X) * std::sin(k * Y);
    hy = s.amplitude * k * std::sin(k * X) * std::cos(k * Y);
    dt = hx * r.x() + hy * r.y();
    return s.distance + h;
  };
  double t = s.distance;
  double hx = 0.0, hy = 0.0, dt = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double g = t - height(t, dt, hx, hy);
    const double step = g / (1.0 - dt);
    t -= step;
    if (std::abs(step) <= 1e-15 * std::abs(t)) break;
  }
  height(t, dt, hx, hy);
  if (!(t > 0.0) || !std::isfinite(t)) return std::nullopt;
  // Surface Z - h(X, Y) = 0; the camera-facing normal is (hx, hy, -1).
  return Hit{t, stored_from_camera(Vec3(hx, hy, -1.0))};
}

}  // namespace

RenderedScene render_scene(const SyntheticScene& scene, const CameraIntrinsics& intrinsics) {
  scene.validate();
  intrinsics.validate();
  const int w = intrinsics.width;
  const int h = intrinsics.height;
  RenderedScene out{DepthMap(w, h), NormalMap(w, h), ScalarImage(w, h, 0.0)};
  std::size_t hits = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 r = intrinsics.ray(x, y);
      std::optional<Hit> hit;
      switch (scene.kind) {
        case SceneKind::kSphere:
          hit = intersect_sphere(scene, r);
          break;
        case SceneKind::kTiltedPlane:
          hit = intersect_plane(scene, r);
          break;
        case SceneKind::kSinusoidalHeightfield:
          hit = intersect_heightfield(scene, r);
          break;
      }
      if (!hit || hit->normal.z() < 0.0) continue;
      out.depth.set(x, y, hit->depth);
      out.normals.set(x, y, hit->normal);
      out.gray(x, y) = scene.albedo;
      ++hits;
    }
  }
  if (hits == 0) {
    throw InvalidArgument("render_scene: the " + std::string(to_string(scene.kind)) +
                          " scene does not intersect the view frustum");
  }
  return out;
}

NormalMap normals_from_depth(const DepthMap& depth, const CameraIntrinsics& intrinsics) {
  if (intrinsics.width != depth.width() || intrinsics.height != depth.height()) {
    throw InvalidArgument("normals_from_depth: intrinsics size differs from the depth map");
  }
  const int w = depth.width();
  const int h = depth.height();
  auto point = [&](int x, int y) { return intrinsics.backproject(x, y, depth(x, y)); };
  auto ok = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && depth.valid(x, y); };
  auto diff = [&](int x, int y, int dx, int dy, Vec3& out) {
    const bool fwd = ok(x + dx, y + dy);
    const bool bwd = ok(x - dx, y - dy);
    if (fwd && bwd) {
      out = point(x + dx, y + dy) - point(x - dx, y - dy);
    } else if (fwd) {
      out = point(x + dx, y + dy) - point(x, y);
    } else if (bwd) {
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
      if (!diff(x, y, 1, 0, tx) || !diff(x, y, 0, 1, ty)) continue;
      const Vec3 c = ty.cross(tx);  // faces the camera for x right, y down, z forward
      const double len = c.norm();
      if (len == 0.0) continue;
      const Vec3 n = stored_from_camera(c / len);
      if (n.z() < 0.0) continue;
      out.set(x, y, n);
    }
  }
  return out;
}

DepthMap smooth_depth(const DepthMap& depth, double sigma_px) {
  if (!(sigma_px >= 0.0)) throw InvalidArgument("smooth_depth: sigma must be non-negative");
  if (sigma_px == 0.0) return depth;
  const int w = depth.width();
  const int h = depth.height();
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_px));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (int i = -radius; i <= radius; ++i) {
    kernel[static_cast<std::size_t>(i + radius)] =
        std::exp(-0.5 * i * i / (sigma_px * sigma_px));
  }

  // Blur value * mask and mask separately, then normalize.
  ScalarImage num(w, h), den(w, h);
  for (std::size_t i = 0; i < num.size(); ++i) {
    den[i] = depth.valid(i) ? 1.0 : 0.0;
    num[i] = den[i] * depth[i];
  }
  auto pass = [&](const ScalarImage& src, bool horizontal) {
    ScalarImage dst(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int sx = horizontal ? x + i : x;
          const int sy = horizontal ? y : y + i;
          if (!src.contains(sx, sy)) continue;
          acc += kernel[static_cast<std::size_t>(i + radius)] * src(sx, sy);
        }
        dst(x, y) = acc;
      }
    }
    return dst;
  };
  num = pass(pass(num, true), false);
  den = pass(pass(den, true), false);

  DepthMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (depth.valid(x, y)) out.set(x, y, num(x, y) / den(x, y));
    }
  }
  return out;
}

}  // namespace polarshape::forward
