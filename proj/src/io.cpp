// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarshape/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace polarshape::io {

namespace {

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0x000000ffu) << 24) | ((v & 0x0000ff00u) << 8) | ((v & 0x00ff0000u) >> 8) |
         ((v & 0xff000000u) >> 24);
}

std::string pixel_format_error(const std::string& what, std::size_t expected, std::size_t got) {
  std::ostringstream os;
  os << what << ": expected " << expected << " bytes of pixel data, got " << got;
  return os.str();
}

// Reads the next whitespace-delimited token starting at `pos`.
std::string next_token(const std::string& s, std::size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  const std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return s.substr(start, pos - start);
}

int parse_positive_int(const std::string& tok, const char* what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v <= 0) {
    throw FormatError(std::string("PFM: invalid ") + what + " '" + tok + "'");
  }
  return v;
}

void check_fields(const Json& doc, const char* what, std::initializer_list<const char*> allowed) {
  if (!doc.is_object()) throw FormatError(std::string(what) + ": expected a JSON object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& item : doc.items()) {
    if (!names.count(item.key())) {
      throw FormatError(std::string(what) + ": unknown field '" + item.key() + "'");
    }
  }
}

const Json& require(const Json& doc, const char* what, const char* field) {
  if (!doc.contains(field)) {
    throw FormatError(std::string(what) + ": missing field '" + field + "'");
  }
  return doc.at(field);
}

double number(const Json& v, const char* what, const char* field) {
  if (!v.is_number()) {
    throw FormatError(std::string(what) + ": field '" + field + "' must be a number");
  }
  return v.get<double>();
}

template <std::size_t N>
std::array<double, N> number_array(const Json& v, const char* what, const char* field) {
  if (!v.is_array() || v.size() != N) {
    throw FormatError(std::string(what) + ": field '" + field + "' must be an array of " +
                      std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = number(v[i], what, field);
  return out;
}

Vec3 vec3(const Json& v, const char* what, const char* field) {
  const auto a = number_array<3>(v, what, field);
  return {a[0], a[1], a[2]};
}

Json vec3_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------- PFM

FloatImage parse_pfm(const std::string& bytes) {
  std::size_t pos = 0;
  const std::string magic = next_token(bytes, pos);
  FloatImage img;
  if (magic == "Pf") {
    img.channels = 1;
  } else if (magic == "PF") {
    img.channels = 3;
  } else {
    throw FormatError("PFM: bad magic '" + magic.substr(0, 8) + "'");
  }
  img.width = parse_positive_int(next_token(bytes, pos), "width");
  img.height = parse_positive_int(next_token(bytes, pos), "height");
  const std::string scale_tok = next_token(bytes, pos);
  double scale = 0.0;
  {
    std::istringstream ss(scale_tok);
    ss.imbue(std::locale::classic());
    if (!(ss >> scale) || !ss.eof() || scale == 0.0 || !std::isfinite(scale)) {
      throw FormatError("PFM: invalid scale '" + scale_tok + "'");
    }
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError(pixel_format_error("PFM: truncated header", 1, 0));
  }
  ++pos;  // single whitespace byte ends the header

  const std::size_t count =
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) *
      static_cast<std::size_t>(img.channels);
  const std::size_t expected = count * sizeof(float);
  const std::size_t available = bytes.size() - pos;
  if (available < expected) throw FormatError(pixel_format_error("PFM", expected, available));

  const bool file_little = scale < 0.0;
  const bool host_little = std::endian::native == std::endian::little;
  img.data.resize(count);
  const std::size_t row = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.channels);
  for (int y = 0; y < img.height; ++y) {
    // File rows run bottom to top.
    const std::size_t src = pos + static_cast<std::size_t>(img.height - 1 - y) * row * sizeof(float);
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, bytes.data() + src + i * sizeof(float), sizeof(bits));
      if (file_little != host_little) bits = byteswap32(bits);
      img.data[static_cast<std::size_t>(y) * row + i] = std::bit_cast<float>(bits);
    }
  }
  return img;
}

std::string serialize_pfm(const FloatImage& img) {
  if (img.channels != 1 && img.channels != 3) throw InvalidArgument("PFM: channels must be 1 or 3");
  const std::size_t row = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.channels);
  if (img.data.size() != row * static_cast<std::size_t>(img.height)) {
    throw InvalidArgument("PFM: data size does not match dimensions");
  }
  std::string out = (img.channels == 1 ? "Pf\n" : "PF\n") + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + img.data.size() * sizeof(float));
  for (int y = 0; y < img.height; ++y) {
    const std::size_t dst = header + static_cast<std::size_t>(img.height - 1 - y) * row * sizeof(float);
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(img.data[static_cast<std::size_t>(y) * row + i]);
      if (std::endian::native != std::endian::little) bits = byteswap32(bits);
      std::memcpy(out.data() + dst + i * sizeof(float), &bits, sizeof(bits));
    }
  }
  return out;
}

FloatImage read_pfm(const fs::path& path) {
  try {
    return parse_pfm(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pfm(const fs::path& path, const FloatImage& img) { write_file(path, serialize_pfm(img)); }

FloatImage to_float_image(const ScalarImage& img) {
  FloatImage f{img.width(), img.height(), 1, std::vector<float>(img.size())};
  for (std::size_t i = 0; i < img.size(); ++i) f.data[i] = static_cast<float>(img[i]);
  return f;
}

FloatImage to_float_image(const DepthMap& depth) {
  FloatImage f{depth.width(), depth.height(), 1, std::vector<float>(depth.image().size())};
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    f.data[i] = depth.valid(i) ? static_cast<float>(depth[i]) : 0.0f;
  }
  return f;
}

FloatImage to_float_image(const Image<Vec3>& normals) {
  FloatImage f{normals.width(), normals.height(), 3, std::vector<float>(normals.size() * 3)};
  for (std::size_t i = 0; i < normals.size(); ++i) {
    for (int c = 0; c < 3; ++c) f.data[i * 3 + static_cast<std::size_t>(c)] = static_cast<float>(normals[i][c]);
  }
  return f;
}

ScalarImage scalar_from_float_image(const FloatImage& img) {
  if (img.channels != 1) throw FormatError("expected a single-channel float image");
  ScalarImage out(img.width, img.height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.data[i];
  return out;
}

DepthMap depth_from_float_image(const FloatImage& img) {
  ScalarImage s = scalar_from_float_image(img);
  for (auto& v : s.pixels()) {
    if (!std::isfinite(v) || v < 0.0) v = 0.0;
  }
  return DepthMap(std::move(s));
}

NormalMap normals_from_float_image(const FloatImage& img) {
  if (img.channels != 3) throw FormatError("expected a three-channel float image for normals");
  Image<Vec3> n(img.width, img.height, Vec3::Zero());
  for (std::size_t i = 0; i < n.size(); ++i) {
    n[i] = Vec3(img.data[i * 3], img.data[i * 3 + 1], img.data[i * 3 + 2]);
  }
  return NormalMap(std::move(n));
}

ScalarImage read_scalar_pfm(const fs::path& path) { return scalar_from_float_image(read_pfm(path)); }
DepthMap read_depth_pfm(const fs::path& path) { return depth_from_float_image(read_pfm(path)); }
NormalMap read_normals_pfm(const fs::path& path) {
  try {
    return normals_from_float_image(read_pfm(path));
  } catch (const InvalidArgument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}
void write_pfm(const fs::path& path, const ScalarImage& img) { write_pfm(path, to_float_image(img)); }
void write_pfm(const fs::path& path, const DepthMap& depth) { write_pfm(path, to_float_image(depth)); }
void write_pfm(const fs::path& path, const NormalMap& normals) {
  write_pfm(path, to_float_image(normals.image()));
}
void write_pfm(const fs::path& path, const Image<Vec3>& normals) {
  write_pfm(path, to_float_image(normals));
}

// ---------------------------------------------------------------- PNG

Image<std::uint8_t> read_png_gray8(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw FormatError(path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  Image<std::uint8_t> out(static_cast<int>(image.width), static_cast<int>(image.height), 0);
  if (!png_image_finish_read(&image, nullptr, out.pixels().data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError(path.string() + ": " + msg);
  }
  return out;
}

void write_png_gray8(const fs::path& path, const Image<std::uint8_t>& img) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels().data(), 0,
                               nullptr)) {
    throw Error(path.string() + ": " + image.message);
  }
}

fs::path channel_path(const fs::path& prefix, int k, const std::string& ext) {
  std::ostringstream os;
  os << prefix.string() << "_" << std::setw(3) << std::setfill('0')
     << static_cast<int>(PolarizationImage::kPolarizerAnglesDeg.at(static_cast<std::size_t>(k)))
     << "." << ext;
  return os.str();
}

void write_polar_png(const fs::path& prefix, const PolarizationImage& img) {
  for (int k = 0; k < 4; ++k) {
    const auto& c = img.channel(k);
    Image<std::uint8_t> bytes(c.width(), c.height(), 0);
    for (std::size_t i = 0; i < c.size(); ++i) bytes[i] = forward::to_byte(c[i]);
    write_png_gray8(channel_path(prefix, k, "png"), bytes);
  }
}

PolarizationImage read_polar_png(const fs::path& prefix) {
  std::array<ScalarImage, 4> ch;
  for (int k = 0; k < 4; ++k) {
    const fs::path p = channel_path(prefix, k, "png");
    if (!fs::exists(p)) throw FormatError("missing polarization channel file '" + p.string() + "'");
    const auto bytes = read_png_gray8(p);
    ScalarImage c(bytes.width(), bytes.height());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = bytes[i] / 255.0;
    ch[static_cast<std::size_t>(k)] = std::move(c);
  }
  try {
    return PolarizationImage(std::move(ch));
  } catch (const InvalidArgument& e) {
    throw FormatError(prefix.string() + ": " + e.what());
  }
}

void write_polar_pfm(const fs::path& prefix, const PolarizationImage& img) {
  for (int k = 0; k < 4; ++k) write_pfm(channel_path(prefix, k, "pfm"), img.channel(k));
}

PolarizationImage read_polar_pfm(const fs::path& prefix) {
  std::array<ScalarImage, 4> ch;
  for (int k = 0; k < 4; ++k) {
    const fs::path p = channel_path(prefix, k, "pfm");
    if (!fs::exists(p)) throw FormatError("missing polarization channel file '" + p.string() + "'");
    ch[static_cast<std::size_t>(k)] = read_scalar_pfm(p);
  }
  try {
    return PolarizationImage(std::move(ch));
  } catch (const InvalidArgument& e) {
    throw FormatError(prefix.string() + ": " + e.what());
  }
}

void write_labels_png(const fs::path& path, const LabelMap& labels) {
  write_png_gray8(path, labels.image());
}

LabelMap read_labels_png(const fs::path& path) {
  try {
    return LabelMap(read_png_gray8(path));
  } catch (const InvalidArgument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- OBJ

TriMesh parse_obj(const std::string& text) {
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw FormatError("OBJ line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail("vertex needs three coordinates");
      verts.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        int v = 0;
        const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), v);
        if (ec != std::errc() || ptr != head.data() + head.size() || v == 0) {
          fail("bad vertex reference '" + tok + "'");
        }
        idx.push_back(v > 0 ? v - 1 : static_cast<int>(verts.size()) + v);
      }
      if (idx.size() != 3) {
        fail("face has " + std::to_string(idx.size()) + " vertices; only triangles are supported");
      }
      faces.push_back({idx[0], idx[1], idx[2]});
    } else if (tag == "vn" || tag == "vt" || tag == "o" || tag == "g" || tag == "s" ||
               tag == "usemtl" || tag == "mtllib") {
      continue;
    } else {
      fail("unsupported record '" + tag + "'");
    }
  }
  try {
    return TriMesh(std::move(verts), std::move(faces));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("OBJ: ") + e.what());
  }
}

std::string serialize_obj(const TriMesh& mesh) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  for (const auto& v : mesh.vertices()) os << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& f : mesh.faces()) {
    os << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
  }
  return os.str();
}

TriMesh read_obj(const fs::path& path) {
  try {
    return parse_obj(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_obj(const fs::path& path, const TriMesh& mesh) { write_file(path, serialize_obj(mesh)); }

// ---------------------------------------------------------------- JSON

Json read_json(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& doc) { write_file(path, doc.dump(2) + "\n"); }

Json to_json(const CameraIntrinsics& k) {
  return Json{{"fx", k.fx}, {"fy", k.fy}, {"px", k.px}, {"py", k.py},
              {"width", k.width}, {"height", k.height}};
}

CameraIntrinsics intrinsics_from_json(const Json& doc) {
  constexpr const char* what = "intrinsics";
  check_fields(doc, what, {"fx", "fy", "px", "py", "width", "height"});
  CameraIntrinsics k;
  k.fx = number(require(doc, what, "fx"), what, "fx");
  k.fy = number(require(doc, what, "fy"), what, "fy");
  k.px = number(require(doc, what, "px"), what, "px");
  k.py = number(require(doc, what, "py"), what, "py");
  const Json& w = require(doc, what, "width");
  const Json& h = require(doc, what, "height");
  if (!w.is_number_integer() || !h.is_number_integer()) {
    throw FormatError("intrinsics: width and height must be integers");
  }
  k.width = w.get<int>();
  k.height = h.get<int>();
  try {
    k.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return k;
}

Json to_json(const Skeleton& s) {
  Json joints = Json::array();
  for (const auto& j : s.joints) joints.push_back(vec3_json(j));
  return Json{{"units", "m"}, {"joints", std::move(joints)}};
}

Skeleton skeleton_from_json(const Json& doc) {
  constexpr const char* what = "skeleton";
  check_fields(doc, what, {"units", "joints"});
  if (doc.contains("units") && doc.at("units") != "m") {
    throw FormatError("skeleton: units must be \"m\"");
  }
  const Json& joints = require(doc, what, "joints");
  if (!joints.is_array() || joints.size() != Skeleton::kJointCount) {
    throw FormatError("skeleton: 'joints' must hold exactly 24 [x, y, z] entries");
  }
  Skeleton s;
  for (std::size_t j = 0; j < Skeleton::kJointCount; ++j) s.joints[j] = vec3(joints[j], what, "joints");
  return s;
}

Json to_json(const BodyParams& p) {
  return Json{{"shape", p.shape}, {"pose", p.pose}, {"translation", p.translation}};
}

BodyParams body_params_from_json(const Json& doc) {
  constexpr const char* what = "body params";
  check_fields(doc, what, {"shape", "pose", "translation"});
  BodyParams p;
  p.shape = number_array<BodyParams::kShapeDim>(require(doc, what, "shape"), what, "shape");
  p.pose = number_array<BodyParams::kPoseDim>(require(doc, what, "pose"), what, "pose");
  p.translation = number_array<BodyParams::kTranslationDim>(require(doc, what, "translation"),
                                                            what, "translation");
  return p;
}

Json to_json(const forward::SyntheticScene& s) {
  Json doc{{"kind", std::string(forward::to_string(s.kind))}, {"albedo", s.albedo}};
  switch (s.kind) {
    case forward::SceneKind::kSphere:
      doc["center"] = vec3_json(s.center);
      doc["radius"] = s.radius;
      break;
    case forward::SceneKind::kTiltedPlane:
      doc["distance"] = s.distance;
      doc["plane_normal"] = vec3_json(s.plane_normal);
      break;
    case forward::SceneKind::kSinusoidalHeightfield:
      doc["distance"] = s.distance;
      doc["amplitude"] = s.amplitude;
      doc["frequency"] = s.frequency;
      break;
  }
  return doc;
}

forward::SyntheticScene scene_from_json(const Json& doc) {
  constexpr const char* what = "scene";
  check_fields(doc, what,
               {"kind", "center", "radius", "distance", "plane_normal", "amplitude", "frequency",
                "albedo"});
  const Json& kind = require(doc, what, "kind");
  if (!kind.is_string()) throw FormatError("scene: 'kind' must be a string");
  forward::SyntheticScene s;
  try {
    s.kind = forward::scene_kind_from_string(kind.get<std::string>());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("scene: ") + e.what());
  }
  if (doc.contains("center")) s.center = vec3(doc.at("center"), what, "center");
  if (doc.contains("radius")) s.radius = number(doc.at("radius"), what, "radius");
  if (doc.contains("distance")) s.distance = number(doc.at("distance"), what, "distance");
  if (doc.contains("plane_normal")) s.plane_normal = vec3(doc.at("plane_normal"), what, "plane_normal");
  if (doc.contains("amplitude")) s.amplitude = number(doc.at("amplitude"), what, "amplitude");
  if (doc.contains("frequency")) s.frequency = number(doc.at("frequency"), what, "frequency");
  if (doc.contains("albedo")) s.albedo = number(doc.at("albedo"), what, "albedo");
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return s;
}

Json to_json(const integrate::IntegrationWeights& w) {
  return Json{{"normal", w.normal}, {"data", w.data}, {"smooth", w.smooth}};
}

integrate::IntegrationWeights weights_from_json(const Json& doc) {
  constexpr const char* what = "integration weights";
  check_fields(doc, what, {"normal", "data", "smooth"});
  integrate::IntegrationWeights w;
  w.normal = number(require(doc, what, "normal"), what, "normal");
  w.data = number(require(doc, what, "data"), what, "data");
  w.smooth = number(require(doc, what, "smooth"), what, "smooth");
  try {
    w.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return w;
}

meshops::JointSubset joint_subset_from_json(const Json& doc) {
  constexpr const char* what = "joint subset";
  check_fields(doc, what, {"removed_joints"});
  const Json& removed = require(doc, what, "removed_joints");
  if (!removed.is_array()) throw FormatError("joint subset: 'removed_joints' must be an array");
  std::vector<int> ids;
  for (const auto& v : removed) {
    if (!v.is_number_integer() || v.get<int>() < 0 ||
        v.get<int>() >= static_cast<int>(Skeleton::kJointCount)) {
      throw FormatError("joint subset: joint indices must be integers in [0, 24)");
    }
    ids.push_back(v.get<int>());
  }
  return meshops::JointSubset::excluding(ids);
}

}  // namespace polarshape::io
