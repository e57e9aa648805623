// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "polarshape/core.hpp"
#include "polarshape/forward.hpp"
#include "polarshape/integrate.hpp"
#include "polarshape/meshops.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace polarshape::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// Malformed or truncated file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Float raster with interleaved channels, rows stored top to bottom.
struct FloatImage {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 or 3
  std::vector<float> data;

  float& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

// Portable Float Map. Written little-endian ("-1.0" scale) with rows bottom to
// top; the reader accepts either byte order.
FloatImage read_pfm(const fs::path& path);
void write_pfm(const fs::path& path, const FloatImage& img);
FloatImage parse_pfm(const std::string& bytes);
std::string serialize_pfm(const FloatImage& img);

FloatImage to_float_image(const ScalarImage& img);
FloatImage to_float_image(const DepthMap& depth);  // invalid pixels stored as 0
FloatImage to_float_image(const Image<Vec3>& normals);
ScalarImage scalar_from_float_image(const FloatImage& img);
DepthMap depth_from_float_image(const FloatImage& img);
NormalMap normals_from_float_image(const FloatImage& img);

ScalarImage read_scalar_pfm(const fs::path& path);
DepthMap read_depth_pfm(const fs::path& path);
NormalMap read_normals_pfm(const fs::path& path);
void write_pfm(const fs::path& path, const ScalarImage& img);
void write_pfm(const fs::path& path, const DepthMap& depth);
void write_pfm(const fs::path& path, const NormalMap& normals);
void write_pfm(const fs::path& path, const Image<Vec3>& normals);

// 8-bit grayscale PNG.
Image<std::uint8_t> read_png_gray8(const fs::path& path);
void write_png_gray8(const fs::path& path, const Image<std::uint8_t>& img);

/// "<prefix>_000.<ext>", "<prefix>_045.<ext>", ... for channel k.
fs::path channel_path(const fs::path& prefix, int k, const std::string& ext);

/// Four PNG files; value v stored as round(v * 255) and read back as k / 255.
void write_polar_png(const fs::path& prefix, const PolarizationImage& img);
PolarizationImage read_polar_png(const fs::path& prefix);

/// Four single-channel PFM files (lossless at float precision).
void write_polar_pfm(const fs::path& prefix, const PolarizationImage& img);
PolarizationImage read_polar_pfm(const fs::path& prefix);

void write_labels_png(const fs::path& path, const LabelMap& labels);
LabelMap read_labels_png(const fs::path& path);

// Wavefront OBJ restricted to triangles.
TriMesh read_obj(const fs::path& path);
TriMesh parse_obj(const std::string& text);
void write_obj(const fs::path& path, const TriMesh& mesh);
std::string serialize_obj(const TriMesh& mesh);

// JSON documents; field names and units are described in schemas/.
Json read_json(const fs::path& path);
void write_json(const fs::path& path, const Json& doc);

Json to_json(const CameraIntrinsics& k);
Json to_json(const Skeleton& s);
Json to_json(const BodyParams& p);
Json to_json(const forward::SyntheticScene& scene);
Json to_json(const integrate::IntegrationWeights& w);

CameraIntrinsics intrinsics_from_json(const Json& doc);
Skeleton skeleton_from_json(const Json& doc);
BodyParams body_params_from_json(const Json& doc);
forward::SyntheticScene scene_from_json(const Json& doc);
integrate::IntegrationWeights weights_from_json(const Json& doc);
meshops::JointSubset joint_subset_from_json(const Json& doc);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& bytes);

}  // namespace polarshape::io
