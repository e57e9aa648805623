// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarshape/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

namespace polarshape::inverse {

namespace {

constexpr double kPi = std::numbers::pi;

double cosine(const Vec3& a, const Vec3& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace

StokesMaps stokes_decompose(const PolarizationImage& img) {
  const int w = img.width();
  const int h = img.height();
  StokesMaps s{ScalarImage(w, h), ScalarImage(w, h), ScalarImage(w, h)};
  const auto& c = img.channels();
  for (std::size_t i = 0; i < s.s0.size(); ++i) {
    s.s0[i] = 0.5 * (c[0][i] + c[1][i] + c[2][i] + c[3][i]);
    s.s1[i] = c[0][i] - c[2][i];
    s.s2[i] = c[1][i] - c[3][i];
  }
  return s;
}

AzimuthDoP azimuth_dop(const StokesMaps& stokes, forward::RefractiveIndex n) {
  require_same_shape(stokes.s0, stokes.s1, "azimuth_dop");
  require_same_shape(stokes.s0, stokes.s2, "azimuth_dop");
  const int w = stokes.s0.width();
  const int h = stokes.s0.height();
  const double rho_max = forward::max_dop(n);
  AzimuthDoP out{ScalarImage(w, h), DoPMap{ScalarImage(w, h), Mask(w, h, 0)}};
  for (std::size_t i = 0; i < stokes.s0.size(); ++i) {
    const double s0 = stokes.s0[i];
    if (!(s0 > kMinTotalIntensity)) continue;
    const double s1 = stokes.s1[i];
    const double s2 = stokes.s2[i];
    double phi = 0.5 * std::atan2(s2, s1);
    if (phi < 0.0) phi += kPi;
    if (phi >= kPi) phi -= kPi;
    out.azimuth[i] = phi;
    out.dop.rho[i] = std::min(std::hypot(s1, s2) / s0, rho_max);
    out.dop.valid[i] = 1;
  }
  return out;
}

double zenith_from_dop(double rho, forward::RefractiveIndex index) {
  const double rho_max = forward::max_dop(index);
  if (!(rho >= 0.0) || rho > rho_max * (1.0 + 1e-12)) {
    throw InvalidArgument("zenith_from_dop: DoP outside [0, max_dop(n)]; clamp first");
  }
  if (rho == 0.0) return 0.0;
  rho = std::min(rho, rho_max);

  // Write s = sin^2(theta). Isolating the radical in the DoP relation gives
  //   K - q s = -4 rho cos(theta) sqrt(n^2 - s),  K = rho (2 + 2n^2), q = rho b + a,
  // and squaring yields A s^2 + B s + C = 0 (divided through by rho):
  //   A = q^2 - 16 rho^2,  B = 4 (1 + n^2)(4 rho - q),  C = 4 rho (n^2 - 1)^2.
  const double n = index.value();
  const double n2 = n * n;
  const double a = (n - 1.0 / n) * (n - 1.0 / n);
  const double b = (n + 1.0 / n) * (n + 1.0 / n);
  const double q = rho * b + a;
  const double K = rho * (2.0 + 2.0 * n2);
  const double A = q * q - 16.0 * rho * rho;
  const double B = 4.0 * rho * (1.0 + n2) * (4.0 * rho - q);
  const double C = 4.0 * rho * rho * (n2 - 1.0) * (n2 - 1.0);

  const double disc = std::max(B * B - 4.0 * A * C, 0.0);
  const double t = -0.5 * (B + std::copysign(std::sqrt(disc), B));
  const double roots[2] = {t / A, C / t};

  // Keep the root in [0, 1] that satisfies the unsquared equation (K - q s <= 0).
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_err = std::numeric_limits<double>::infinity();
  for (double s : roots) {
    if (!std::isfinite(s) || s < -1e-12 || s > 1.0 + 1e-12) continue;
    s = std::clamp(s, 0.0, 1.0);
    const double lhs = K - q * s;
    const double rhs = -4.0 * rho * std::sqrt(1.0 - s) * std::sqrt(n2 - s);
    const double err = std::abs(lhs - rhs);
    if (err < best_err) {
      best_err = err;
      best = s;
    }
  }
  if (!std::isfinite(best)) {
    throw NumericalError("zenith_from_dop: no admissible root");
  }
  return std::atan2(std::sqrt(best), std::sqrt(1.0 - best));
}

ScalarImage zenith_from_dop(const DoPMap& dop, forward::RefractiveIndex n) {
  require_same_shape(dop.rho, dop.valid, "zenith_from_dop");
  ScalarImage out(dop.rho.width(), dop.rho.height(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (dop.valid[i]) out[i] = zenith_from_dop(dop.rho[i], n);
  }
  return out;
}

AngleMaps recover_angles(const PolarizationImage& img, forward::RefractiveIndex n) {
  auto ad = azimuth_dop(stokes_decompose(img), n);
  AngleMaps angles;
  angles.zenith = zenith_from_dop(ad.dop, n);
  angles.azimuth = std::move(ad.azimuth);
  angles.valid = std::move(ad.dop.valid);
  return angles;
}

std::pair<NormalMap, NormalMap> ambiguous_normals(const AngleMaps& angles) {
  angles.validate();
  const int w = angles.azimuth.width();
  const int h = angles.azimuth.height();
  NormalMap n1(w, h), n2(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!angles.valid(x, y)) continue;
      const double phi = angles.azimuth(x, y);
      const double theta = angles.zenith(x, y);
      n1.set(x, y, normal_from_angles(phi, theta));
      n2.set(x, y, normal_from_angles(phi + kPi, theta));
    }
  }
  return {std::move(n1), std::move(n2)};
}

LabelMap generate_labels(const NormalMap& n1, const NormalMap& n2, const NormalMap& target) {
  require_same_shape(n1.image(), n2.image(), "generate_labels");
  require_same_shape(n1.image(), target.image(), "generate_labels");
  LabelMap labels(target.width(), target.height());
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      if (!target.is_foreground(x, y)) continue;
      const Vec3& t = target(x, y);
      labels.set(x, y, n1(x, y).dot(t) >= n2(x, y).dot(t) ? Category::kFirst : Category::kSecond);
    }
  }
  return labels;
}

FusedNormalMap fuse_normals(const NormalMap& n1, const NormalMap& n2, const ProbMaps& probs) {
  require_same_shape(n1.image(), n2.image(), "fuse_normals");
  require_same_shape(n1.image(), probs.p(0), "fuse_normals");
  constexpr double kEps = 1e-12;
  FusedNormalMap out{Image<Vec3>(n1.width(), n1.height(), Vec3::Zero())};
  for (std::size_t i = 0; i < out.normals.size(); ++i) {
    const double p0 = probs(0, i), p1 = probs(1, i), p2 = probs(2, i);
    // With one weight zero the direction is the other (unit) normal; taking it
    // directly keeps one-hot probabilities bit-exact.
    if (p2 == 0.0 && p1 > 0.0) {
      out.normals[i] = (1.0 - p0) * n1[i];
      continue;
    }
    if (p1 == 0.0 && p2 > 0.0) {
      out.normals[i] = (1.0 - p0) * n2[i];
      continue;
    }
    const Vec3 blend = p1 * n1[i] + p2 * n2[i];
    const double len = blend.norm();
    if (len <= kEps) continue;
    out.normals[i] = (1.0 - p0) * blend / len;
  }
  return out;
}

NormalMap disambiguate_oracle(const NormalMap& n1, const NormalMap& n2, const NormalMap& target) {
  const LabelMap labels = generate_labels(n1, n2, target);
  NormalMap out(target.width(), target.height());
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      switch (static_cast<Category>(labels(x, y))) {
        case Category::kBackground:
          break;
        case Category::kFirst:
          out.set(x, y, n1(x, y));
          break;
        case Category::kSecond:
          out.set(x, y, n2(x, y));
          break;
      }
    }
  }
  return out;
}

Pixel foreground_centroid_pixel(const Mask& foreground) {
  double sx = 0.0, sy = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < foreground.height(); ++y) {
    for (int x = 0; x < foreground.width(); ++x) {
      if (!foreground(x, y)) continue;
      sx += x;
      sy += y;
      ++count;
    }
  }
  if (count == 0) throw InvalidArgument("foreground_centroid_pixel: empty foreground");
  const double cx = sx / static_cast<double>(count);
  const double cy = sy / static_cast<double>(count);
  Pixel best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int y = 0; y < foreground.height(); ++y) {
    for (int x = 0; x < foreground.width(); ++x) {
      if (!foreground(x, y)) continue;
      const double d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      if (d < best_d) {
        best_d = d;
        best = {x, y};
      }
    }
  }
  return best;
}

NormalMap disambiguate_propagate(const NormalMap& n1, const NormalMap& n2, const Mask& foreground,
                                 Pixel seed) {
  require_same_shape(n1.image(), n2.image(), "disambiguate_propagate");
  require_same_shape(n1.image(), foreground, "disambiguate_propagate");
  if (!foreground.contains(seed.x, seed.y) || !foreground(seed.x, seed.y)) {
    throw InvalidArgument("disambiguate_propagate: seed pixel (" + std::to_string(seed.x) + ", " +
                          std::to_string(seed.y) + ") is not foreground");
  }
  const int w = foreground.width();
  const int h = foreground.height();
  NormalMap out(w, h);
  Mask queued(w, h, 0);
  Mask assigned(w, h, 0);
  constexpr int kDx[4] = {1, -1, 0, 0};
  constexpr int kDy[4] = {0, 0, 1, -1};

  auto grow = [&](Pixel start) {
    std::deque<Pixel> queue{start};
    queued(start.x, start.y) = 1;
    bool is_seed = true;
    while (!queue.empty()) {
      const Pixel p = queue.front();
      queue.pop_front();
      const Vec3& a = n1(p.x, p.y);
      const Vec3& b = n2(p.x, p.y);
      bool take_first = true;
      if (is_seed) {
        take_first = a.z() >= b.z();
        is_seed = false;
      } else {
        Vec3 mean = Vec3::Zero();
        for (int k = 0; k < 4; ++k) {
          const int qx = p.x + kDx[k];
          const int qy = p.y + kDy[k];
          if (foreground.contains(qx, qy) && assigned(qx, qy)) mean += out(qx, qy);
        }
        take_first = a.dot(mean) >= b.dot(mean);
      }
      out.set(p.x, p.y, take_first ? a : b);
      assigned(p.x, p.y) = 1;
      for (int k = 0; k < 4; ++k) {
        const int qx = p.x + kDx[k];
        const int qy = p.y + kDy[k];
        if (!foreground.contains(qx, qy) || !foreground(qx, qy) || queued(qx, qy)) continue;
        queued(qx, qy) = 1;
        queue.push_back({qx, qy});
      }
    }
  };

  grow(seed);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (foreground(x, y) && !queued(x, y)) grow({x, y});
    }
  }
  return out;
}

double normal_loss(const Image<Vec3>& pred, const ProbMaps& probs, const LabelMap& labels,
                   const NormalMap& target, LossWeights weights) {
  require_same_shape(pred, target.image(), "normal_loss");
  require_same_shape(pred, probs.p(0), "normal_loss");
  require_same_shape(pred, labels.image(), "normal_loss");
  if (!(weights.classification >= 0.0) || !(weights.normal >= 0.0)) {
    throw InvalidArgument("normal_loss: weights must be non-negative");
  }
  if (pred.size() == 0) throw InvalidArgument("normal_loss: empty maps");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double py = std::max(probs(labels[i], i), kProbabilityFloor);
    total += -weights.classification * std::log(py);
    if (target.is_foreground(i)) {
      total += weights.normal * (1.0 - cosine(pred[i], target[i]));
    }
  }
  return total / static_cast<double>(pred.size());
}

double mean_angular_error(const Image<Vec3>& pred, const Image<Vec3>& target) {
  require_same_shape(pred, target, "mean_angular_error");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].isZero(0.0) || target[i].isZero(0.0)) continue;
    const double c = std::clamp(cosine(pred[i], target[i]), -1.0, 1.0);
    sum += std::acos(c);
    ++count;
  }
  if (count == 0) {
    throw InvalidArgument("mean_angular_error: no pixel is valid in both maps");
  }
  return sum / static_cast<double>(count) * 180.0 / kPi;
}

double mean_angular_error(const NormalMap& pred, const NormalMap& target) {
  return mean_angular_error(pred.image(), target.image());
}

}  // namespace polarshape::inverse
