// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarshape/inverse.hpp"
#include "polarshape/io.hpp"
#include "polarshape/meshops.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace polarshape;
using polarshape::testing::TempDir;
namespace fs = std::filesystem;

namespace {

testing::CommandResult cli(const TempDir& dir, const std::string& args) {
  return testing::run_command(std::string("'") + POLARSHAPE_CLI + "' " + args,
                              dir / "cli.log");
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path write_intrinsics(const TempDir& dir, int size, double focal) {
  const fs::path p = dir / ("k" + std::to_string(size) + ".json");
  io::write_json(p, io::to_json(testing::square_camera(size, focal)));
  return p;
}

}  // namespace

TEST_CASE("no subcommand or an unknown flag is a usage error") {
  TempDir dir("cli_usage");
  CHECK(cli(dir, "").exit_code == 2);
  CHECK(cli(dir, "synth --bogus").exit_code == 2);
  CHECK(cli(dir, "--help").exit_code == 0);
}

TEST_CASE("synth writes the documented outputs") {
  TempDir dir("cli_synth");
  const auto k = write_intrinsics(dir, 48, 70);
  const auto r = cli(dir, "synth --scene sphere --intrinsics " + q(k) +
                              " --noise-sigma 0 --out-dir " + q(dir / "s"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  for (const char* f : {"depth.pfm", "normals.pfm", "gray.pfm", "polar_000.png", "polar_045.png",
                        "polar_090.png", "polar_135.png", "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(dir / "s" / f), f);
  }
  const auto manifest = io::read_json(dir / "s" / "manifest.json");
  CHECK(manifest["noise_sigma"].get<double>() == 0.0);
  CHECK(manifest["seed"].get<std::uint64_t>() == 0);
  CHECK(manifest["quantized"].get<bool>());
  CHECK(manifest["channel_identity_max_abs"].get<double>() <= 1e-12);
  CHECK(manifest["scene"]["kind"] == "sphere");
}

TEST_CASE("synth is byte-reproducible for a fixed seed") {
  TempDir dir("cli_repro");
  const auto k = write_intrinsics(dir, 40, 60);
  for (const char* out : {"a", "b"}) {
    REQUIRE(cli(dir, "synth --scene sphere --seed 77 --intrinsics " + q(k) + " --out-dir " +
                         q(dir / out))
                .exit_code == 0);
  }
  REQUIRE(cli(dir, "synth --scene sphere --seed 78 --intrinsics " + q(k) + " --out-dir " +
                       q(dir / "c"))
              .exit_code == 0);
  bool any_differs = false;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const auto name = e.path().filename();
    CHECK_MESSAGE(testing::slurp(e.path()) == testing::slurp(dir / "b" / name), name.string());
    any_differs |= testing::slurp(e.path()) != testing::slurp(dir / "c" / name);
  }
  CHECK(any_differs);
}

TEST_CASE("synth rejects an invalid scene kind with exit code 2") {
  TempDir dir("cli_scene");
  const auto k = write_intrinsics(dir, 16, 20);
  const auto r = cli(dir, "synth --scene cube --intrinsics " + q(k) + " --out-dir " + q(dir / "s"));
  CHECK(r.exit_code == 2);
}

TEST_CASE("synth accepts scene parameter overrides") {
  TempDir dir("cli_params");
  const auto k = write_intrinsics(dir, 32, 40);
  io::write_file(dir / "scene.json", R"({"amplitude": 0.05, "frequency": 3.0})");
  REQUIRE(cli(dir, "synth --scene heightfield --scene-params " + q(dir / "scene.json") +
                       " --intrinsics " + q(k) + " --out-dir " + q(dir / "s"))
              .exit_code == 0);
  const auto m = io::read_json(dir / "s" / "manifest.json");
  CHECK(m["scene"]["amplitude"].get<double>() == 0.05);
  io::write_file(dir / "bad.json", R"({"amplitud": 0.05})");
  CHECK(cli(dir, "synth --scene heightfield --scene-params " + q(dir / "bad.json") +
                     " --intrinsics " + q(k) + " --out-dir " + q(dir / "t"))
            .exit_code == 1);
}

TEST_CASE("normals: oracle round trip, usage errors and default seed") {
  TempDir dir("cli_normals");
  const auto k = write_intrinsics(dir, 64, 100);
  REQUIRE(cli(dir, "synth --scene sphere --noise-sigma 0 --no-quantize --intrinsics " + q(k) +
                       " --out-dir " + q(dir / "s"))
              .exit_code == 0);
  const auto prefix = q(dir / "s" / "polar");
  const auto target = q(dir / "s" / "normals.pfm");

  CHECK(cli(dir, "normals --polar-prefix " + prefix + " --disambiguate oracle --out " +
                     q(dir / "o"))
            .exit_code == 2);

  const auto r = cli(dir, "normals --polar-prefix " + prefix + " --disambiguate oracle --target " +
                              target + " --out " + q(dir / "o"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  CHECK(r.output.find("MAE") != std::string::npos);
  for (const char* f : {"n1.pfm", "n2.pfm", "normals.pfm", "report.json"}) {
    CHECK(fs::exists(dir / "o" / f));
  }
  CHECK(io::read_json(dir / "o" / "report.json")["metrics"]["mae_deg"].get<double>() < 0.5);
  CHECK(io::read_json(dir / "o" / "report.json")["inputs"]["refractive_index"].get<double>() ==
        1.5);

  REQUIRE(cli(dir, "normals --polar-prefix " + prefix + " --out " + q(dir / "p")).exit_code == 0);
  const auto report = io::read_json(dir / "p" / "report.json");
  const auto fg = io::read_normals_pfm(dir / "p" / "n1.pfm").foreground();
  const auto seed = inverse::foreground_centroid_pixel(fg);
  CHECK(report["inputs"]["seed_pixel"][0].get<int>() == seed.x);
  CHECK(report["inputs"]["seed_pixel"][1].get<int>() == seed.y);

  CHECK(cli(dir, "normals --polar-prefix " + prefix + " --seed-pixel 0,0 --out " + q(dir / "p"))
            .exit_code == 1);  // background seed
  CHECK(cli(dir, "normals --polar-prefix " + prefix + " --seed-pixel a,b --out " + q(dir / "p"))
            .exit_code == 2);
}

TEST_CASE("integrate then eval depth on the heightfield fixture") {
  TempDir dir("cli_integrate");
  const auto k = write_intrinsics(dir, 64, 100);
  io::write_file(dir / "scene.json", R"({"amplitude": 0.02, "frequency": 2.0})");
  REQUIRE(cli(dir, "synth --scene sinusoidal-heightfield --scene-params " + q(dir / "scene.json") +
                       " --noise-sigma 0 --no-quantize --base-blur 4 --intrinsics " + q(k) +
                       " --out-dir " + q(dir / "h"))
              .exit_code == 0);
  const auto r = cli(dir, "integrate --normals " + q(dir / "h" / "normals.pfm") + " --base-depth " +
                              q(dir / "h" / "base_depth.pfm") + " --intrinsics " + q(k) +
                              " --out " + q(dir / "refined.pfm"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  const auto report = io::read_json(dir / "refined.report.json");
  CHECK(report["solver"]["relative_residual"].get<double>() <= 1e-8);
  CHECK(report["inputs"]["weights"]["smooth"].get<double>() == 0.55);

  REQUIRE(cli(dir, "eval --mode depth --pred " + q(dir / "refined.pfm") + " --truth " +
                       q(dir / "h" / "depth.pfm") + " --base " + q(dir / "h" / "base_depth.pfm") +
                       " --report " + q(dir / "eval.json"))
              .exit_code == 0);
  const auto eval = io::read_json(dir / "eval.json");
  const double refined = eval["metrics"]["rmse_pred_m"].get<double>();
  const double base = eval["metrics"]["rmse_base_m"].get<double>();
  MESSAGE("rmse refined " << refined << " base " << base);
  CHECK(refined < base);

  CHECK(cli(dir, "integrate --normals " + q(dir / "h" / "normals.pfm") + " --intrinsics " + q(k) +
                     " --out " + q(dir / "x.pfm"))
            .exit_code == 2);
  CHECK(cli(dir, "integrate --normals " + q(dir / "h" / "normals.pfm") + " --base-depth " +
                     q(dir / "h" / "base_depth.pfm") + " --weights 1,2 --intrinsics " + q(k) +
                     " --out " + q(dir / "x.pfm"))
            .exit_code == 2);
}

TEST_CASE("integrate from a mesh, then deform with refined = base") {
  TempDir dir("cli_mesh");
  const auto k = write_intrinsics(dir, 64, 80);
  const auto mesh = meshops::make_icosphere(Vec3(0, 0, 3), 1.0, 3);
  io::write_obj(dir / "mesh.obj", mesh);
  const auto base = meshops::render_base_depth(mesh, testing::square_camera(64, 80));
  io::write_pfm(dir / "base.pfm", base);

  REQUIRE(cli(dir, "deform --mesh " + q(dir / "mesh.obj") + " --refined " + q(dir / "base.pfm") +
                       " --base " + q(dir / "base.pfm") + " --intrinsics " + q(k) + " --out " +
                       q(dir / "out.obj"))
              .exit_code == 0);
  CHECK(testing::slurp(dir / "out.obj") == testing::slurp(dir / "mesh.obj"));
  CHECK(fs::exists(dir / "out.report.json"));

  // normals of the rendered mesh, then mesh-driven integration
  io::write_pfm(dir / "chord.pfm", integrate::chord_normals(base, testing::square_camera(64, 80)));
  const auto r = cli(dir, "integrate --normals " + q(dir / "chord.pfm") + " --mesh " +
                              q(dir / "mesh.obj") + " --intrinsics " + q(k) + " --out " +
                              q(dir / "ref.pfm"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  CHECK(fs::exists(dir / "ref.base.pfm"));
}

TEST_CASE("eval modes") {
  TempDir dir("cli_eval");
  Skeleton s;
  for (std::size_t j = 0; j < 24; ++j) s.joints[j] = Vec3(0.05 * j, 0.1, 2.0);
  io::write_json(dir / "s.json", io::to_json(s));
  const auto r = cli(dir, "eval --mode joints --pred " + q(dir / "s.json") + " --truth " +
                              q(dir / "s.json") + " --report " + q(dir / "j.json"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  const auto rep = io::read_json(dir / "j.json");
  CHECK(rep["metrics"]["mpjpe24_mm"].get<double>() == 0.0);
  CHECK(rep["metrics"]["mpjpe20_mm"].get<double>() == 0.0);

  // mode/input mismatch
  CHECK(cli(dir, "eval --mode joints --pred " + q(dir / "s.json")).exit_code == 2);
  CHECK(cli(dir, "eval --mode fancy").exit_code == 2);

  const auto mesh = meshops::make_icosphere(Vec3(0, 0, 3), 1.0, 2);
  io::write_obj(dir / "m.obj", mesh);
  const auto m = cli(dir, "eval --mode mesh --pred " + q(dir / "m.obj") + " --truth " +
                              q(dir / "m.obj") + " --report " + q(dir / "m.json"));
  REQUIRE_MESSAGE(m.exit_code == 0, m.output);
  CHECK(io::read_json(dir / "m.json")["metrics"]["surface_error_mm"].get<double>() < 1e-9);

  io::write_file(dir / "broken.obj", "v 0 0 1\nf 1 2 3 4\n");
  CHECK(cli(dir, "eval --mode mesh --pred " + q(dir / "broken.obj") + " --truth " +
                     q(dir / "m.obj"))
            .exit_code == 1);
}

TEST_CASE("labels command") {
  TempDir dir("cli_labels");
  const auto k = write_intrinsics(dir, 32, 50);
  REQUIRE(cli(dir, "synth --scene sphere --noise-sigma 0 --no-quantize --intrinsics " + q(k) +
                       " --out-dir " + q(dir / "s"))
              .exit_code == 0);
  REQUIRE(cli(dir, "normals --polar-prefix " + q(dir / "s" / "polar") + " --out " + q(dir / "n"))
              .exit_code == 0);
  const auto r = cli(dir, "labels --n1 " + q(dir / "n" / "n1.pfm") + " --n2 " +
                              q(dir / "n" / "n2.pfm") + " --target " +
                              q(dir / "s" / "normals.pfm") + " --out " + q(dir / "l.png"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  const auto labels = io::read_labels_png(dir / "l.png");
  const auto target = io::read_normals_pfm(dir / "s" / "normals.pfm");
  for (std::size_t i = 0; i < labels.image().size(); ++i) {
    CHECK((labels[i] == 0) == !target.is_foreground(i));
  }
}
