// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include "polarshape/forward.hpp"
#include "polarshape/integrate.hpp"
#include "polarshape/inverse.hpp"
#include "polarshape/io.hpp"
#include "polarshape/meshops.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace polarshape::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;

constexpr int kReportVersion = 1;

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Json report_header(const std::string& command) {
  return Json{{"command", command}, {"report_version", kReportVersion}};
}

fs::path default_report_path(const fs::path& out) {
  fs::path p = out;
  p.replace_extension(".report.json");
  return p;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  ss.imbue(std::locale::classic());
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": cannot parse '" + item + "'");
    }
  }
  if (out.size() != expected) {
    throw UsageError(std::string(flag) + ": expected " + std::to_string(expected) +
                     " comma-separated values");
  }
  return out;
}

forward::SyntheticScene default_scene(forward::SceneKind kind) {
  forward::SyntheticScene s;
  s.kind = kind;
  switch (kind) {
    case forward::SceneKind::kSphere:
      s.center = Vec3(0.0, 0.0, 3.0);
      s.radius = 1.0;
      break;
    case forward::SceneKind::kTiltedPlane:
      s.distance = 2.0;
      s.plane_normal = Vec3(0.3, -0.2, 1.0).normalized();
      break;
    case forward::SceneKind::kSinusoidalHeightfield:
      s.distance = 2.0;
      s.amplitude = 0.02;
      s.frequency = 2.0;
      break;
  }
  return s;
}

// ------------------------------------------------------------------ synth

struct SynthOptions {
  std::string scene;
  std::string scene_params;
  std::string intrinsics;
  double noise_sigma = 1.0 / 255.0;
  std::uint64_t seed = 0;
  double refractive_index = forward::RefractiveIndex::kDefault;
  bool no_quantize = false;
  double base_blur = 0.0;
  std::string out_dir;
};

void run_synth(const SynthOptions& o) {
  const auto kind = forward::scene_kind_from_string(o.scene);
  forward::SyntheticScene scene = default_scene(kind);
  if (!o.scene_params.empty()) {
    Json doc = io::read_json(o.scene_params);
    if (!doc.contains("kind")) {
      doc["kind"] = std::string(forward::to_string(kind));
    } else if (doc.at("kind").is_string() &&
               forward::scene_kind_from_string(doc.at("kind").get<std::string>()) != kind) {
      throw UsageError("--scene-params kind differs from --scene");
    }
    Json merged = io::to_json(scene);
    for (const auto& item : doc.items()) merged[item.key()] = item.value();
    scene = io::scene_from_json(merged);
  }
  const CameraIntrinsics k = io::intrinsics_from_json(io::read_json(o.intrinsics));
  const forward::RefractiveIndex n(o.refractive_index);

  const auto rendered = forward::render_scene(scene, k);
  const PolarizationImage clean =
      forward::synthesize_polarization(rendered.normals, rendered.gray, k, n);
  double identity_max = 0.0;
  for (std::size_t i = 0; i < clean.channel(0).size(); ++i) {
    identity_max = std::max(identity_max,
                            std::abs(clean.channel(0)[i] + clean.channel(2)[i] -
                                     clean.channel(1)[i] - clean.channel(3)[i]));
  }
  const Mask fg = rendered.normals.foreground();
  const PolarizationImage noisy = forward::add_noise(clean, o.noise_sigma, o.seed, &fg);

  const fs::path out(o.out_dir);
  fs::create_directories(out);
  io::write_pfm(out / "depth.pfm", rendered.depth);
  io::write_pfm(out / "normals.pfm", rendered.normals);
  io::write_pfm(out / "gray.pfm", rendered.gray);
  Json files = Json::array({"depth.pfm", "normals.pfm", "gray.pfm"});
  const std::string ext = o.no_quantize ? "pfm" : "png";
  if (o.no_quantize) {
    io::write_polar_pfm(out / "polar", noisy);
  } else {
    io::write_polar_png(out / "polar", forward::quantize(noisy));
  }
  for (int c = 0; c < 4; ++c) files.push_back(io::channel_path("polar", c, ext).string());
  if (o.base_blur > 0.0) {
    io::write_pfm(out / "base_depth.pfm", forward::smooth_depth(rendered.depth, o.base_blur));
    files.push_back("base_depth.pfm");
  }

  Json manifest = report_header("synth");
  manifest["scene"] = io::to_json(scene);
  manifest["intrinsics"] = io::to_json(k);
  manifest["refractive_index"] = n.value();
  manifest["noise_sigma"] = o.noise_sigma;
  manifest["seed"] = o.seed;
  manifest["quantized"] = !o.no_quantize;
  manifest["base_blur_px"] = o.base_blur;
  manifest["foreground_pixels"] = rendered.depth.valid_count();
  manifest["channel_identity_max_abs"] = identity_max;
  manifest["files"] = files;
  io::write_json(out / "manifest.json", manifest);
  std::cout << "wrote " << files.size() << " files to " << out.string() << "\n";
}

// ------------------------------------------------------------------ normals

struct NormalsOptions {
  std::string polar_prefix;
  std::string polar_format = "auto";
  double refractive_index = forward::RefractiveIndex::kDefault;
  std::string disambiguate = "propagate";
  std::string target;
  std::string seed_pixel;
  std::string out;
};

PolarizationImage read_polarization(const std::string& prefix, std::string format) {
  if (format == "auto") {
    format = fs::exists(io::channel_path(prefix, 0, "png")) ? "png" : "pfm";
  }
  return format == "png" ? io::read_polar_png(prefix) : io::read_polar_pfm(prefix);
}

void run_normals(const NormalsOptions& o) {
  if (o.disambiguate == "oracle" && o.target.empty()) {
    throw UsageError("--disambiguate oracle requires --target");
  }
  Stopwatch total;
  const forward::RefractiveIndex n(o.refractive_index);
  const PolarizationImage img = read_polarization(o.polar_prefix, o.polar_format);
  const AngleMaps angles = inverse::recover_angles(img, n);
  auto [n1, n2] = inverse::ambiguous_normals(angles);

  std::optional<NormalMap> target;
  if (!o.target.empty()) {
    target = io::read_normals_pfm(o.target);
    require_same_shape(target->image(), n1.image(), "--target");
  }

  Json report = report_header("normals");
  report["inputs"] = Json{{"polar_prefix", o.polar_prefix},
                          {"refractive_index", n.value()},
                          {"disambiguate", o.disambiguate},
                          {"target", o.target}};
  NormalMap selected;
  if (o.disambiguate == "oracle") {
    selected = inverse::disambiguate_oracle(n1, n2, *target);
  } else {
    inverse::Pixel seed;
    if (o.seed_pixel.empty()) {
      seed = inverse::foreground_centroid_pixel(angles.valid);
    } else {
      const auto xy = parse_list(o.seed_pixel, 2, "--seed-pixel");
      seed = {static_cast<int>(xy[0]), static_cast<int>(xy[1])};
    }
    selected = inverse::disambiguate_propagate(n1, n2, angles.valid, seed);
    report["inputs"]["seed_pixel"] = Json::array({seed.x, seed.y});
  }

  const fs::path out(o.out);
  fs::create_directories(out);
  io::write_pfm(out / "n1.pfm", n1);
  io::write_pfm(out / "n2.pfm", n2);
  io::write_pfm(out / "normals.pfm", selected);

  const Mask fg = selected.foreground();
  Json metrics{{"foreground_pixels", std::count(fg.pixels().begin(), fg.pixels().end(), 1)}};
  if (target) {
    const double mae = inverse::mean_angular_error(selected, *target);
    metrics["mae_deg"] = mae;
    std::cout << "MAE " << mae << " deg\n";
  }
  report["metrics"] = metrics;
  report["timings_ms"] = Json{{"total", total.elapsed_ms()}};
  io::write_json(out / "report.json", report);
}

// ------------------------------------------------------------------ integrate

struct IntegrateOptions {
  std::string normals;
  std::string base_depth;
  std::string mesh;
  std::string intrinsics;
  std::string weights = "1.0,0.06,0.55";
  double tolerance = 1e-8;
  int max_iterations = 0;
  std::string out;
  std::string report;
};

void run_integrate(const IntegrateOptions& o) {
  Stopwatch total;
  const auto w = parse_list(o.weights, 3, "--weights");
  integrate::IntegrationWeights weights{w[0], w[1], w[2]};
  try {
    weights.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("--weights: ") + e.what());
  }
  const CameraIntrinsics k = io::intrinsics_from_json(io::read_json(o.intrinsics));
  const NormalMap normals = io::read_normals_pfm(o.normals);
  const DepthMap base = o.mesh.empty() ? io::read_depth_pfm(o.base_depth)
                                       : meshops::render_base_depth(io::read_obj(o.mesh), k);

  Stopwatch assemble;
  const auto system = integrate::assemble_system(normals, base, k, weights);
  const double assemble_ms = assemble.elapsed_ms();
  Stopwatch solve;
  const auto solution = integrate::solve_depth(system, {o.tolerance, o.max_iterations});
  const double solve_ms = solve.elapsed_ms();

  const fs::path out(o.out);
  ensure_parent(out);
  io::write_pfm(out, solution.depth);
  if (!o.mesh.empty()) {
    fs::path base_out = out;
    base_out.replace_filename(out.stem().string() + ".base.pfm");
    io::write_pfm(base_out, base);
  }

  Json report = report_header("integrate");
  report["inputs"] = Json{{"normals", o.normals},
                          {"base_depth", o.base_depth},
                          {"mesh", o.mesh},
                          {"intrinsics", o.intrinsics},
                          {"weights", io::to_json(weights)}};
  report["solver"] = Json{{"method", "jacobi-pcg-normal-equations"},
                          {"unknowns", system.unknowns()},
                          {"residual_rows", system.A.rows()},
                          {"iterations", solution.iterations},
                          {"relative_residual", solution.relative_residual},
                          {"tolerance", o.tolerance},
                          {"objective", integrate::objective(system, solution.values)}};
  report["timings_ms"] =
      Json{{"assemble", assemble_ms}, {"solve", solve_ms}, {"total", total.elapsed_ms()}};
  io::write_json(o.report.empty() ? default_report_path(out) : fs::path(o.report), report);
  std::cout << "solved " << system.unknowns() << " unknowns in " << solution.iterations
            << " iterations (relative residual " << solution.relative_residual << ")\n";
}

// ------------------------------------------------------------------ deform

struct DeformOptions {
  std::string mesh;
  std::string refined;
  std::string base;
  std::string intrinsics;
  double step = 1.0;
  double tau = 0.005;
  int upsample = 0;
  std::string out;
  std::string report;
};

void run_deform(const DeformOptions& o) {
  Stopwatch total;
  const CameraIntrinsics k = io::intrinsics_from_json(io::read_json(o.intrinsics));
  TriMesh mesh = io::read_obj(o.mesh);
  if (o.upsample > 0) mesh = meshops::upsample_mesh(mesh, o.upsample);
  const DepthMap refined = io::read_depth_pfm(o.refined);
  const DepthMap base = io::read_depth_pfm(o.base);
  const TriMesh out_mesh = meshops::deform_to_depth(mesh, refined, base, k, {o.step, o.tau});

  double max_move = 0.0;
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    max_move = std::max(max_move, (out_mesh.vertices()[i] - mesh.vertices()[i]).norm());
  }
  const fs::path out(o.out);
  ensure_parent(out);
  io::write_obj(out, out_mesh);

  Json report = report_header("deform");
  report["inputs"] = Json{{"mesh", o.mesh},   {"refined", o.refined},     {"base", o.base},
                          {"step", o.step},   {"visibility_tolerance", o.tau},
                          {"upsample_levels", o.upsample}};
  report["metrics"] = Json{{"vertices", out_mesh.vertex_count()},
                           {"faces", out_mesh.face_count()},
                           {"max_displacement_m", max_move}};
  report["timings_ms"] = Json{{"total", total.elapsed_ms()}};
  io::write_json(o.report.empty() ? default_report_path(out) : fs::path(o.report), report);
}

// ------------------------------------------------------------------ eval

struct EvalOptions {
  std::string mode;
  std::string pred;
  std::string target;
  std::string truth;
  std::string base;
  std::string pred_params;
  std::string truth_params;
  std::string joint_subset;
  double max_zenith_deg = 90.0;
  bool no_icp = false;
  std::string report;
};

void require_flag(const std::string& value, const char* flag, const std::string& mode) {
  if (value.empty()) throw UsageError("--mode " + mode + " requires " + flag);
}

void run_eval(const EvalOptions& o) {
  Stopwatch total;
  Json report = report_header("eval");
  report["mode"] = o.mode;
  Json metrics = Json::object();

  if (o.mode == "normals") {
    require_flag(o.pred, "--pred", o.mode);
    require_flag(o.target, "--target", o.mode);
    const NormalMap pred = io::read_normals_pfm(o.pred);
    const NormalMap target = io::read_normals_pfm(o.target);
    Image<Vec3> masked = target.image();
    const double min_nz = std::cos(o.max_zenith_deg * std::numbers::pi / 180.0);
    for (auto& n : masked.pixels()) {
      if (!n.isZero(0.0) && n.z() < min_nz) n.setZero();
    }
    metrics["mae_deg"] = inverse::mean_angular_error(pred.image(), masked);
    metrics["max_zenith_deg"] = o.max_zenith_deg;
  } else if (o.mode == "depth") {
    require_flag(o.pred, "--pred", o.mode);
    require_flag(o.truth, "--truth", o.mode);
    const DepthMap pred = io::read_depth_pfm(o.pred);
    const DepthMap truth = io::read_depth_pfm(o.truth);
    metrics["rmse_pred_m"] = integrate::depth_rmse(pred, truth);
    if (!o.base.empty()) {
      const DepthMap base = io::read_depth_pfm(o.base);
      const Mask common = pred.mask();
      metrics["rmse_base_m"] = integrate::depth_rmse(base, truth, &common);
    }
  } else if (o.mode == "mesh") {
    require_flag(o.pred, "--pred", o.mode);
    require_flag(o.truth, "--truth", o.mode);
    const TriMesh pred = io::read_obj(o.pred);
    const TriMesh truth = io::read_obj(o.truth);
    metrics["surface_error_raw_mm"] = meshops::surface_error(pred, truth);
    if (!o.no_icp) {
      const auto icp = meshops::scaled_rigid_icp(pred.vertices(), truth.vertices());
      metrics["surface_error_mm"] = meshops::surface_error(
          std::span<const Vec3>(icp.aligned), std::span<const Vec3>(truth.vertices()));
      metrics["icp"] = Json{{"scale", icp.transform.scale},
                            {"iterations", icp.iterations},
                            {"final_rms_m", icp.residual_history.empty()
                                                 ? 0.0
                                                 : icp.residual_history.back()}};
    } else {
      metrics["surface_error_mm"] = metrics["surface_error_raw_mm"];
    }
  } else if (o.mode == "joints") {
    require_flag(o.pred, "--pred", o.mode);
    require_flag(o.truth, "--truth", o.mode);
    const Skeleton pred = io::skeleton_from_json(io::read_json(o.pred));
    const Skeleton truth = io::skeleton_from_json(io::read_json(o.truth));
    const auto subset20 = o.joint_subset.empty()
                              ? meshops::JointSubset::body20()
                              : io::joint_subset_from_json(io::read_json(o.joint_subset));
    metrics["mpjpe24_mm"] = meshops::mpjpe(pred, truth, meshops::JointSubset::all24());
    metrics["mpjpe20_mm"] = meshops::mpjpe(pred, truth, subset20);
    if (!o.pred_params.empty() || !o.truth_params.empty()) {
      require_flag(o.pred_params, "--pred-params", o.mode);
      require_flag(o.truth_params, "--truth-params", o.mode);
      metrics["param_loss"] = meshops::param_loss(
          io::body_params_from_json(io::read_json(o.pred_params)), pred,
          io::body_params_from_json(io::read_json(o.truth_params)), truth);
    }
  }

  report["metrics"] = metrics;
  report["timings_ms"] = Json{{"total", total.elapsed_ms()}};
  if (!o.report.empty()) {
    ensure_parent(o.report);
    io::write_json(o.report, report);
  }
  std::cout << report.dump(2) << "\n";
}

// ------------------------------------------------------------------ labels

struct LabelsOptions {
  std::string n1;
  std::string n2;
  std::string target;
  std::string out;
};

void run_labels(const LabelsOptions& o) {
  const LabelMap labels = inverse::generate_labels(
      io::read_normals_pfm(o.n1), io::read_normals_pfm(o.n2), io::read_normals_pfm(o.target));
  const fs::path out(o.out);
  ensure_parent(out);
  io::write_labels_png(out, labels);
  std::size_t counts[3] = {0, 0, 0};
  for (auto v : labels.image().pixels()) ++counts[v];
  std::cout << "labels: background " << counts[0] << ", n1 " << counts[1] << ", n2 " << counts[2]
            << "\n";
}

}  // namespace

Command add_synth(CLI::App& app) {
  auto o = std::make_shared<SynthOptions>();
  CLI::App* sub = app.add_subcommand("synth", "Render an analytic scene and its polarization stack");
  sub->add_option("--scene", o->scene, "Scene kind")
      ->required()
      ->check(CLI::IsMember({"sphere", "plane", "tilted-plane", "heightfield",
                             "sinusoidal-heightfield"}));
  sub->add_option("--scene-params", o->scene_params, "Scene parameter JSON")->check(CLI::ExistingFile);
  sub->add_option("--intrinsics", o->intrinsics, "Camera intrinsics JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--noise-sigma", o->noise_sigma, "Gaussian noise sigma (intensity units)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", o->seed, "Noise seed")->capture_default_str();
  sub->add_option("--refractive-index", o->refractive_index)->capture_default_str();
  sub->add_flag("--no-quantize", o->no_quantize, "Write float PFM channels instead of 8-bit PNG");
  sub->add_option("--base-blur", o->base_blur,
                  "Also write base_depth.pfm, the depth blurred with this sigma (pixels)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--out-dir", o->out_dir)->required();
  return {sub, [o] { run_synth(*o); }};
}

Command add_normals(CLI::App& app) {
  auto o = std::make_shared<NormalsOptions>();
  CLI::App* sub = app.add_subcommand("normals", "Recover normals from a polarization stack");
  sub->add_option("--polar-prefix", o->polar_prefix, "Channel files <prefix>_000.png ...")
      ->required();
  sub->add_option("--polar-format", o->polar_format)
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "png", "pfm"}));
  sub->add_option("--refractive-index", o->refractive_index)->capture_default_str();
  sub->add_option("--disambiguate", o->disambiguate)
      ->capture_default_str()
      ->check(CLI::IsMember({"oracle", "propagate"}));
  sub->add_option("--target", o->target, "Target normal map (PFM)")->check(CLI::ExistingFile);
  sub->add_option("--seed-pixel", o->seed_pixel, "x,y (default: foreground centroid)");
  sub->add_option("--out", o->out, "Output directory")->required();
  return {sub, [o] { run_normals(*o); }};
}

Command add_integrate(CLI::App& app) {
  auto o = std::make_shared<IntegrateOptions>();
  CLI::App* sub = app.add_subcommand("integrate", "Refine a base depth map with a normal map");
  sub->add_option("--normals", o->normals)->required()->check(CLI::ExistingFile);
  auto* base = sub->add_option("--base-depth", o->base_depth)->check(CLI::ExistingFile);
  auto* mesh = sub->add_option("--mesh", o->mesh, "Coarse mesh rendered as the base depth")
                   ->check(CLI::ExistingFile);
  base->excludes(mesh);
  mesh->excludes(base);
  sub->add_option("--intrinsics", o->intrinsics)->required()->check(CLI::ExistingFile);
  sub->add_option("--weights", o->weights, "normal,data,smooth")->capture_default_str();
  sub->add_option("--tol", o->tolerance)->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", o->max_iterations, "0 selects 10 sqrt(unknowns)")
      ->capture_default_str();
  sub->add_option("--out", o->out, "Refined depth (PFM)")->required();
  sub->add_option("--report", o->report, "Report path (default <out>.report.json)");
  return {sub, [o] {
            if (o->base_depth.empty() && o->mesh.empty()) {
              throw UsageError("integrate requires --base-depth or --mesh");
            }
            run_integrate(*o);
          }};
}

Command add_deform(CLI::App& app) {
  auto o = std::make_shared<DeformOptions>();
  CLI::App* sub = app.add_subcommand("deform", "Deform a mesh toward a refined depth map");
  sub->add_option("--mesh", o->mesh)->required()->check(CLI::ExistingFile);
  sub->add_option("--refined", o->refined)->required()->check(CLI::ExistingFile);
  sub->add_option("--base", o->base)->required()->check(CLI::ExistingFile);
  sub->add_option("--intrinsics", o->intrinsics)->required()->check(CLI::ExistingFile);
  sub->add_option("--step", o->step)->capture_default_str();
  sub->add_option("--visibility-tolerance", o->tau, "meters")->capture_default_str();
  sub->add_option("--upsample", o->upsample, "Midpoint subdivision levels before deforming")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--out", o->out, "Output OBJ")->required();
  sub->add_option("--report", o->report, "Report path (default <out>.report.json)");
  return {sub, [o] { run_deform(*o); }};
}

Command add_eval(CLI::App& app) {
  auto o = std::make_shared<EvalOptions>();
  CLI::App* sub = app.add_subcommand("eval", "Evaluate normals, depth, meshes or joints");
  sub->add_option("--mode", o->mode)
      ->required()
      ->check(CLI::IsMember({"normals", "depth", "mesh", "joints"}));
  sub->add_option("--pred", o->pred)->check(CLI::ExistingFile);
  sub->add_option("--target", o->target, "Target normals (normals mode)")->check(CLI::ExistingFile);
  sub->add_option("--truth", o->truth, "Ground truth (depth, mesh, joints modes)")
      ->check(CLI::ExistingFile);
  sub->add_option("--base", o->base, "Base depth to compare against (depth mode)")
      ->check(CLI::ExistingFile);
  sub->add_option("--pred-params", o->pred_params)->check(CLI::ExistingFile);
  sub->add_option("--truth-params", o->truth_params)->check(CLI::ExistingFile);
  sub->add_option("--joint-subset", o->joint_subset, "JSON with removed_joints for MPJPE-20")
      ->check(CLI::ExistingFile);
  sub->add_option("--max-zenith-deg", o->max_zenith_deg, "Ignore target normals beyond this zenith")
      ->capture_default_str();
  sub->add_flag("--no-icp", o->no_icp, "Skip scaled rigid ICP (mesh mode)");
  sub->add_option("--report", o->report, "Also write the report here");
  return {sub, [o] { run_eval(*o); }};
}

Command add_labels(CLI::App& app) {
  auto o = std::make_shared<LabelsOptions>();
  CLI::App* sub = app.add_subcommand("labels", "Classification labels from ambiguous normals");
  sub->add_option("--n1", o->n1)->required()->check(CLI::ExistingFile);
  sub->add_option("--n2", o->n2)->required()->check(CLI::ExistingFile);
  sub->add_option("--target", o->target)->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "Label map (8-bit PNG, values 0/1/2)")->required();
  return {sub, [o] { run_labels(*o); }};
}

}  // namespace polarshape::cli
