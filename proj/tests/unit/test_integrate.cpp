// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarshape/forward.hpp"
#include "polarshape/integrate.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace polarshape;
using namespace polarshape::integrate;

namespace {

// Dense rows of the three-term energy, written directly from the definitions.
// Columns follow row-major order of the pixels valid in `base`.
struct DenseProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<int> column;  // pixel index -> column, -1 if not an unknown
};

DenseProblem dense_problem(const NormalMap& normals, const DepthMap& base,
                           const CameraIntrinsics& k, const IntegrationWeights& w) {
  const int W = base.width(), H = base.height();
  DenseProblem p;
  p.column.assign(static_cast<std::size_t>(W * H), -1);
  int n = 0;
  for (int i = 0; i < W * H; ++i) {
    if (base.valid(static_cast<std::size_t>(i))) p.column[i] = n++;
  }
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  auto col = [&](int x, int y) { return p.column[static_cast<std::size_t>(y * W + x)]; };
  auto ray = [&](int x, int y) { return Vec3((x - k.px) / k.fx, (y - k.py) / k.fy, 1.0); };

  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (col(x, y) < 0 || !normals.is_foreground(x, y)) continue;
      // outward camera-frame normal
      const Vec3 o(normals(x, y).x(), normals(x, y).y(), -normals(x, y).z());
      const int nb[2][2] = {{x + 1, y}, {x, y + 1}};
      for (const auto& q : nb) {
        if (q[0] >= W || q[1] >= H || col(q[0], q[1]) < 0) continue;
        Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
        r[col(q[0], q[1])] += std::sqrt(w.normal) * o.dot(ray(q[0], q[1]));
        r[col(x, y)] -= std::sqrt(w.normal) * o.dot(ray(x, y));
        rows.push_back(r);
        rhs.push_back(0.0);
      }
    }
  }
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (col(x, y) < 0) continue;
      const double f = ray(x, y).squaredNorm();
      Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
      r[col(x, y)] = std::sqrt(w.data) * f;
      rows.push_back(r);
      rhs.push_back(std::sqrt(w.data) * f * base(x, y));
    }
  }
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (col(x, y) < 0) continue;
      const int nb[2][2] = {{x + 1, y}, {x, y + 1}};
      for (const auto& q : nb) {
        if (q[0] >= W || q[1] >= H || col(q[0], q[1]) < 0) continue;
        Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
        r[col(x, y)] = std::sqrt(w.smooth);
        r[col(q[0], q[1])] = -std::sqrt(w.smooth);
        rows.push_back(r);
        rhs.push_back(0.0);
      }
    }
  }
  p.A.resize(static_cast<Eigen::Index>(rows.size()), n);
  p.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    p.A.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    p.b[static_cast<Eigen::Index>(i)] = rhs[i];
  }
  return p;
}

double dense_energy(const DenseProblem& p, const Eigen::VectorXd& d) {
  return (p.A * d - p.b).squaredNorm();
}

Eigen::VectorXd dense_solution(const DenseProblem& p) {
  return p.A.colPivHouseholderQr().solve(p.b);
}

DepthMap constant_depth(int w, int h, double z) { return DepthMap(ScalarImage(w, h, z)); }

NormalMap uniform_normals(int w, int h, const Vec3& n) {
  return NormalMap(Image<Vec3>(w, h, n));
}

struct Fixture {
  CameraIntrinsics k;
  DepthMap truth;
  NormalMap normals;
  DepthMap base;
};

Fixture heightfield(int size, double blur) {
  Fixture f;
  f.k = testing::square_camera(size, 100);
  forward::SyntheticScene s;
  s.kind = forward::SceneKind::kSinusoidalHeightfield;
  s.amplitude = 0.02;
  s.frequency = 2.0;
  const auto r = forward::render_scene(s, f.k);
  f.truth = r.depth;
  f.normals = r.normals;
  f.base = forward::smooth_depth(r.depth, blur);
  return f;
}

}  // namespace

TEST_CASE("weights must be non-negative with a positive data weight") {
  CHECK_NOTHROW(IntegrationWeights{}.validate());
  CHECK_THROWS_AS((IntegrationWeights{-1, 0.06, 0.55}.validate()), InvalidArgument);
  CHECK_THROWS_AS((IntegrationWeights{1, 0.0, 0.55}.validate()), InvalidArgument);
}

TEST_CASE("constant base with frontal normals is a fixed point") {
  const CameraIntrinsics k{3, 3, 1, 1, 3, 3};
  const auto sol = refine_depth(uniform_normals(3, 3, Vec3(0, 0, 1)), constant_depth(3, 3, 2.0), k);
  for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(sol.depth[i] - 2.0) < 1e-10);
}

TEST_CASE("a single valid pixel keeps its base depth") {
  const CameraIntrinsics k{3, 3, 1, 1, 3, 3};
  DepthMap base(3, 3);
  base.set(2, 1, 1.7);
  const auto sol = refine_depth(uniform_normals(3, 3, Vec3(0.6, 0, 0.8)), base, k);
  CHECK(sol.depth(2, 1) == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(sol.depth.valid_count() == 1);
}

TEST_CASE("no valid pixels is an error") {
  const CameraIntrinsics k{3, 3, 1, 1, 3, 3};
  CHECK_THROWS_AS(assemble_system(uniform_normals(3, 3, Vec3(0, 0, 1)), DepthMap(3, 3), k),
                  InvalidArgument);
  CHECK_THROWS_AS(assemble_system(uniform_normals(3, 2, Vec3(0, 0, 1)), constant_depth(3, 3, 1), k),
                  InvalidArgument);
}

TEST_CASE("assembled energy equals the directly evaluated energy") {
  const auto f = heightfield(12, 1.5);
  const IntegrationWeights w{0.8, 0.2, 0.3};
  const auto sys = assemble_system(f.normals, f.base, f.k, w);
  const auto dense = dense_problem(f.normals, f.base, f.k, w);
  CHECK(sys.A.rows() == dense.A.rows());
  CHECK(static_cast<Eigen::Index>(sys.unknowns()) == dense.A.cols());
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(1.5, 2.5);
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd d(dense.A.cols());
    for (auto& v : d) v = u(gen);
    CHECK(objective(sys, d) == doctest::Approx(dense_energy(dense, d)).epsilon(1e-12));
  }
}

TEST_CASE("tilted normals over a frontal base match the dense least-squares oracle") {
  const CameraIntrinsics k{3, 3, 1, 1, 3, 3};
  const NormalMap normals = uniform_normals(3, 3, Vec3(0.3, -0.2, 1.0).normalized());
  const DepthMap base = constant_depth(3, 3, 2.0);
  for (const IntegrationWeights& w :
       {IntegrationWeights{}, IntegrationWeights{1.0, 1.0, 0.0}, IntegrationWeights{5, 0.01, 2}}) {
    const auto sys = assemble_system(normals, base, k, w);
    const auto sol = solve_depth(sys, {1e-12, 1000});
    const auto ref = dense_solution(dense_problem(normals, base, k, w));
    for (Eigen::Index i = 0; i < ref.size(); ++i) CHECK(std::abs(sol.values[i] - ref[i]) < 1e-8);
  }
}

TEST_CASE("solver meets its relative residual on success") {
  const auto f = heightfield(32, 2.0);
  const auto sys = assemble_system(f.normals, f.base, f.k);
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    const auto sol = solve_depth(sys, {tol, 0});
    CHECK(sol.relative_residual <= tol);
    CHECK(normal_equation_residual(sys, sol.values) <= tol);
  }
}

TEST_CASE("non-convergence reports the residual") {
  const auto f = heightfield(32, 2.0);
  const auto sys = assemble_system(f.normals, f.base, f.k);
  try {
    solve_depth(sys, {1e-14, 1});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}

TEST_CASE("normal equations are positive semidefinite") {
  const auto f = heightfield(16, 1.0);
  const auto sys = assemble_system(f.normals, f.base, f.k);
  std::mt19937_64 gen(4);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(sys.unknowns()));
    for (auto& x : v) x = g(gen);
    CHECK((sys.A * v).squaredNorm() >= 0.0);
    const Eigen::VectorXd AtAv = sys.A.transpose() * (sys.A * v);
    CHECK(v.dot(AtAv) >= -1e-12 * v.squaredNorm());
  }
}

TEST_CASE("dominant data term returns the base") {
  const auto f = heightfield(24, 2.0);
  const auto sol = refine_depth(f.normals, f.base, f.k, {1.0, 1e6, 0.55});
  for (std::size_t i = 0; i < sol.depth.image().size(); ++i) {
    CHECK(std::abs(sol.depth[i] - f.base[i]) <= 1e-3 * f.base[i]);
  }
}

TEST_CASE("strong smoothing without normals flattens toward the mean") {
  const CameraIntrinsics k{3, 3, 1, 1, 3, 3};
  ScalarImage d(3, 3);
  for (int i = 0; i < 9; ++i) d[static_cast<std::size_t>(i)] = 1.0 + 0.1 * i;
  const DepthMap base(d);
  const IntegrationWeights w{0.0, 0.06, 1e4};
  // The smoothing rows dominate the data rows by ~1e5, which puts the
  // attainable relative residual near 1e-10.
  const auto sol = solve_depth(assemble_system(uniform_normals(3, 3, Vec3(0, 0, 1)), base, k, w),
                               {1e-9, 1000});
  const auto ref = dense_solution(dense_problem(uniform_normals(3, 3, Vec3(0, 0, 1)), base, k, w));
  double spread = 0.0;
  for (Eigen::Index i = 0; i < 9; ++i) {
    CHECK(std::abs(sol.values[i] - ref[i]) < 1e-8);
    spread = std::max(spread, std::abs(sol.values[i] - sol.values[0]));
  }
  CHECK(spread < 1e-3);
  // the flat value is the data-weighted mean of the base
  double num = 0.0, den = 0.0;
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) {
      const double f2 = std::pow(k.ray(x, y).squaredNorm(), 2);
      num += f2 * base(x, y);
      den += f2;
    }
  }
  CHECK(sol.values[4] == doctest::Approx(num / den).epsilon(1e-3));
}

TEST_CASE("chord normals make the base depth an exact solution") {
  // Smoothing penalizes any non-constant depth, so consistency needs w_s = 0.
  const auto f = heightfield(20, 2.0);
  const NormalMap chords = chord_normals(f.base, f.k);
  const auto sys = assemble_system(chords, f.base, f.k, {1.0, 0.06, 0.0});
  CHECK(objective(sys, sys.base) < 1e-20);
  const auto sol = solve_depth(sys);
  for (std::size_t i = 0; i < sol.depth.image().size(); ++i) {
    CHECK(std::abs(sol.depth[i] - f.base[i]) < 1e-9);
  }
}

TEST_CASE("returned depth is stationary under single-pixel perturbations") {
  const auto f = heightfield(32, 2.0);
  const auto sol = refine_depth(f.normals, f.base, f.k, {}, {1e-12, 0});
  std::vector<double> d(sol.depth.image().pixels().begin(), sol.depth.image().pixels().end());
  const double e0 = oracle::depth_energy(f.normals, f.base, f.k, {}, d);
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
  for (int t = 0; t < 100; ++t) {
    const std::size_t j = pick(gen);
    for (double h : {1e-4, -1e-4}) {
      auto p = d;
      p[j] += h;
      CHECK(oracle::depth_energy(f.normals, f.base, f.k, {}, p) >= e0);
    }
  }
}

TEST_CASE("dense minimizer oracles agree with each other and with the solver") {
  const CameraIntrinsics k{3, 3, 1, 1, 3, 3};
  const NormalMap normals = uniform_normals(3, 3, Vec3(-0.4, 0.25, 1.0).normalized());
  ScalarImage z(3, 3, 2.0);
  z(2, 2) = 2.2;
  const DepthMap base(z);
  const IntegrationWeights w{};
  const auto a = oracle::dense_minimizer(normals, base, k, w);
  const auto b = dense_solution(dense_problem(normals, base, k, w));
  const auto sol = solve_depth(assemble_system(normals, base, k, w), {1e-12, 1000});
  for (Eigen::Index i = 0; i < 9; ++i) {
    CHECK(std::abs(a[i] - b[i]) < 1e-9);
    CHECK(std::abs(sol.values[i] - a[i]) < 1e-8);
  }
}

TEST_CASE("pixels outside the normal foreground get data and smoothness rows only") {
  const CameraIntrinsics k{4, 4, 1.5, 1.5, 4, 4};
  NormalMap normals(4, 4);
  normals.set(0, 0, Vec3(0, 0, 1));
  const auto sys = assemble_system(normals, constant_depth(4, 4, 1.0), k);
  std::size_t normal_rows = 0;
  for (auto kind : sys.row_kinds) {
    normal_rows += kind == ResidualKind::kNormalX || kind == ResidualKind::kNormalY ? 1 : 0;
  }
  CHECK(normal_rows == 2);
  CHECK(sys.unknowns() == 16);
  CHECK(sys.A.rows() == 2 + 16 + 24);
}

TEST_CASE("high-frequency detail of the refined depth tracks the truth") {
  const double blur = 3.0;
  const auto f = heightfield(64, blur);
  const auto sol = refine_depth(f.normals, f.base, f.k);
  const auto hp = [&](const DepthMap& d) {
    const DepthMap low = forward::smooth_depth(d, blur);
    std::vector<double> out;
    for (std::size_t i = 0; i < d.image().size(); ++i) out.push_back(d[i] - low[i]);
    return out;
  };
  const auto a = hp(sol.depth);
  const auto b = hp(f.truth);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  const double corr = sab / std::sqrt(saa * sbb);
  MESSAGE("high-pass correlation " << corr);
  CHECK(corr > 0.9);
}

TEST_CASE("depth rmse") {
  ScalarImage a(2, 2, 1.0), b(2, 2, 1.0);
  b(0, 0) = 1.3;
  b(1, 1) = 0.0;  // invalid, ignored
  CHECK(depth_rmse(DepthMap(a), DepthMap(b)) == doctest::Approx(0.3 / std::sqrt(3.0)));
  Mask m(2, 2, 1);
  m(0, 0) = 0;
  CHECK(depth_rmse(DepthMap(a), DepthMap(b), &m) == 0.0);
}
