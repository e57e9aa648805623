// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "polarshape/core.hpp"

#include <array>
#include <span>
#include <vector>

namespace polarshape::meshops {

/// Z-buffer rasterization of a camera-frame mesh, sampled at pixel centers
/// with perspective-correct depth. Equal depths keep the lower face index.
/// Throws if any vertex has z <= 0.
DepthMap render_base_depth(const TriMesh& mesh, const CameraIntrinsics& intrinsics);

/// `levels` rounds of 1-to-4 midpoint subdivision. Edges shared by two faces
/// share their midpoint. Rejects edges with more than two incident faces.
TriMesh upsample_mesh(const TriMesh& mesh, int levels);

/// Vertex-to-vertex adjacency (sorted, unique).
std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh);

struct DeformOptions {
  double step = 1.0;
  double visibility_tolerance = 0.005;  // meters
};

/// Moves every visible vertex along its viewing ray so that its depth changes
/// by step * (refined - base), both sampled bilinearly at the vertex
/// projection. A vertex is visible when it projects inside the image onto
/// valid pixels of both maps and its depth lies within the visibility
/// tolerance of the base depth there. Invisible vertices take the mean
/// displacement of their visible 1-ring neighbours (zero if none).
TriMesh deform_to_depth(const TriMesh& mesh, const DepthMap& refined, const DepthMap& base,
                        const CameraIntrinsics& intrinsics, const DeformOptions& options = {});

struct Similarity {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
};

/// Closed-form least-squares similarity mapping source[i] onto target[i].
Similarity umeyama(std::span<const Vec3> source, std::span<const Vec3> target);

struct IcpOptions {
  int max_iterations = 100;
  double tolerance = 1e-12;  // on the decrease of the RMS residual
};

struct IcpResult {
  Similarity transform;
  std::vector<Vec3> aligned;
  std::vector<double> residual_history;  // RMS nearest-neighbour distance per iteration
  int iterations = 0;
};

/// Scaled rigid ICP: alternates nearest-neighbour correspondences with the
/// closed-form similarity update. Runs from the identity and from the
/// principal-axes alignments of the two clouds (centroid and scale matched)
/// and keeps the run with the lowest final residual.
IcpResult scaled_rigid_icp(std::span<const Vec3> source, std::span<const Vec3> target,
                           const IcpOptions& options = {});

/// ICP from a single caller-provided initial transform.
IcpResult scaled_rigid_icp_from(std::span<const Vec3> source, std::span<const Vec3> target,
                                const Similarity& initial, const IcpOptions& options = {});

/// Mean distance (millimeters) from each predicted vertex to its nearest truth vertex.
double surface_error(std::span<const Vec3> pred, std::span<const Vec3> truth);
double surface_error(const TriMesh& pred, const TriMesh& truth);

/// Joints used by the 20-joint MPJPE. The default drops the two feet (10, 11)
/// and the two hands (22, 23) of the 24-joint body ordering.
struct JointSubset {
  std::vector<int> joints;

  static JointSubset all24();
  static JointSubset body20();
  static JointSubset excluding(std::span<const int> removed);
};

/// Mean Euclidean joint error in millimeters (skeletons in meters).
double mpjpe(const Skeleton& pred, const Skeleton& truth, const JointSubset& subset);

struct ParamLossWeights {
  double shape = 0.2;
  double pose = 0.5;
  double translation = 100.0;
  double joints = 3.0;
};

/// w_b |beta - beta'|^2 + w_p |theta - theta'|^2 + w_t |t - t'|^2 + w_j |J - J'|^2.
double param_loss(const BodyParams& pred, const Skeleton& pred_joints, const BodyParams& truth,
                  const Skeleton& truth_joints, const ParamLossWeights& weights = {});

/// Icosahedron refined by `levels` midpoint subdivisions, projected onto the
/// sphere. Faces are wound counter-clockwise seen from outside.
TriMesh make_icosphere(const Vec3& center, double radius, int levels);

}  // namespace polarshape::meshops
