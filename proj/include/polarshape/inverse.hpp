// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "polarshape/core.hpp"
#include "polarshape/forward.hpp"

#include <utility>

namespace polarshape::inverse {

/// s0 at or below this (intensity units) marks a pixel as background.
inline constexpr double kMinTotalIntensity = 1e-6;
/// Floor applied to probabilities before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;

StokesMaps stokes_decompose(const PolarizationImage& img);

struct AzimuthDoP {
  ScalarImage azimuth;  // [0, pi), 0 where invalid
  DoPMap dop;           // clamped to max_dop(n)
};

/// phi = atan2(s2, s1) / 2 folded into [0, pi); rho = min(|(s1, s2)| / s0, max_dop(n)).
AzimuthDoP azimuth_dop(const StokesMaps& stokes, forward::RefractiveIndex n = {});

/// Closed-form inverse of forward::dop_from_zenith. Requires rho in [0, max_dop(n)].
double zenith_from_dop(double rho, forward::RefractiveIndex n = {});

/// Per-pixel zenith for every valid DoP pixel (0 elsewhere).
ScalarImage zenith_from_dop(const DoPMap& dop, forward::RefractiveIndex n = {});

/// Runs stokes_decompose, azimuth_dop and zenith_from_dop.
AngleMaps recover_angles(const PolarizationImage& img, forward::RefractiveIndex n = {});

/// The two normals (phi, theta) and (phi + pi, theta) consistent with the angles.
std::pair<NormalMap, NormalMap> ambiguous_normals(const AngleMaps& angles);

/// 0 on target background; otherwise 1 if <n1, t> >= <n2, t>, else 2.
LabelMap generate_labels(const NormalMap& n1, const NormalMap& n2, const NormalMap& target);

/// (1 - p0) (p1 n1 + p2 n2) / |p1 n1 + p2 n2|; zero where the blend vanishes.
FusedNormalMap fuse_normals(const NormalMap& n1, const NormalMap& n2, const ProbMaps& probs);

/// Picks, per pixel, the candidate closer to `target`; background where target is.
NormalMap disambiguate_oracle(const NormalMap& n1, const NormalMap& n2, const NormalMap& target);

struct Pixel {
  int x = 0;
  int y = 0;
};

/// Smoothness-based disambiguation: breadth-first growth from `seed` over the
/// 4-connected foreground. Each visited pixel takes the candidate with the
/// larger dot product against the mean of its already assigned 4-neighbours;
/// the seed takes the candidate with larger nz (ties go to n1). Foreground
/// components not connected to the seed are grown from their first pixel in
/// row-major order with the seed rule.
NormalMap disambiguate_propagate(const NormalMap& n1, const NormalMap& n2, const Mask& foreground,
                                 Pixel seed);

/// Foreground pixel nearest to the foreground centroid (row-major first on ties).
Pixel foreground_centroid_pixel(const Mask& foreground);

struct LossWeights {
  double classification = 2.0;
  double normal = 1.0;
};

/// Mean over all pixels of  w_c * (-ln p_y) + w_n * (1 - cos(pred, target)),
/// the cosine term being zero where the target is background.
double normal_loss(const Image<Vec3>& pred, const ProbMaps& probs, const LabelMap& labels,
                   const NormalMap& target, LossWeights weights = {});

/// Mean angle (degrees) between pred and target over pixels non-zero in both.
double mean_angular_error(const Image<Vec3>& pred, const Image<Vec3>& target);
double mean_angular_error(const NormalMap& pred, const NormalMap& target);

}  // namespace polarshape::inverse
