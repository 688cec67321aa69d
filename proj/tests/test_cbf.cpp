#include "gapnav/cbf.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace gapnav;
using std::numbers::pi;

namespace {

// h = 10 ReLU(0.3 - y) - 1: zero on y = 0.2, gradient (0, -10) below y = 0.3.
ZbfModel strip_barrier() {
  ZbfModel m;
  m.geometry.lines[0] = {Vec2(0, -1), 0.3};
  m.geometry.active = {true, false, false, false, false};
  m.geometry.radius = 1.0;
  m.alphas(0) = 10.0;
  m.b = -1.0;
  return m;
}

bool near(const Vec2& a, const Vec2& b, double tol) { return (a - b).norm() <= tol; }

}  // namespace

TEST_CASE("cbf qp examples") {
  CbfConfig cfg;
  cfg.v_bound = 1.0;
  auto r = solve_cbf_qp(Vec2(0.5, 0), 10.0, Vec2(1, 0), cfg);
  CHECK(near(r.u, Vec2(0.5, 0), 0.0));
  CHECK_FALSE(r.active);

  CbfConfig wide = cfg;
  wide.v_bound = 5.0;
  r = solve_cbf_qp(Vec2(-1, 0), 0.0, Vec2(1, 0), wide);
  CHECK(near(r.u, Vec2(0, 0), 1e-12));
  CHECK(r.active);
  // Closed-form half-plane projection for a random slanted gradient.
  const Vec2 g(0.6, -0.8), ur(-1.0, 1.0);
  const double h = 0.2;
  const Vec2 proj = ur + std::max(0.0, -(wide.gamma * h + g.dot(ur))) / g.squaredNorm() * g;
  CHECK(near(solve_cbf_qp(ur, h, g, wide).u, proj, 1e-12));

  r = solve_cbf_qp(Vec2(3, -2), 1.0, Vec2(0, 0), cfg);
  CHECK(near(r.u, Vec2(1, -1), 0.0));

  // Half-plane misses the box: steepest box vertex, flagged.
  r = solve_cbf_qp(Vec2(0, 0), -10.0, Vec2(1, 2), cfg);
  CHECK_FALSE(r.feasible);
  CHECK(near(r.u, Vec2(1, 1), 0.0));
}

TEST_CASE("cbf qp agrees with grid brute force") {
  CbfConfig cfg;
  cfg.v_bound = 0.5;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(-0.8, 0.8), G(-3, 3), H(-0.2, 1.0);
  int active = 0;
  for (int t = 0; t < 100; ++t) {
    const Vec2 ur(U(rng), U(rng)), g(G(rng), G(rng));
    const double h = H(rng);
    const auto r = solve_cbf_qp(ur, h, g, cfg);
    const auto lattice = oracle::cbf_grid(ur, h, g, cfg.gamma, cfg.v_bound, 1e-3);
    const auto truth = oracle::cbf_grid(ur, h, g, cfg.gamma, cfg.v_bound, 1e-3, true);
    if (!truth) {
      CHECK_FALSE(r.feasible);
      continue;
    }
    REQUIRE(r.feasible);
    active += r.active;
    CHECK((r.u - *truth).norm() <= 2e-3);
    // Nothing on the plain lattice is feasible and closer.
    if (lattice) CHECK((r.u - ur).norm() <= (*lattice - ur).norm() + 1e-12);
    CHECK(g.dot(r.u) >= -cfg.gamma * h - 1e-9);
    CHECK(r.u.cwiseAbs().maxCoeff() <= cfg.v_bound + 1e-12);
  }
  CHECK(active > 20);
}

TEST_CASE("map_to_unicycle") {
  CbfConfig cfg;
  auto t = map_to_unicycle(Vec2(0.3, 0.4), Vec2(0.3, 0.4), 0.7, cfg);
  CHECK(t.v == doctest::Approx(0.5));
  CHECK(t.w == doctest::Approx(0.7));

  // Rotated by exactly theta_max: rotation only.
  const Vec2 ur(1, 0);
  t = map_to_unicycle(unit_vector(cfg.theta_max), ur, 0.0, cfg);
  CHECK(std::abs(t.v) <= 1e-12);
  CHECK(t.w == doctest::Approx(cfg.k_omega * cfg.theta_max));

  t = map_to_unicycle(unit_vector(-cfg.theta_max / 2), ur, 0.1, cfg);
  CHECK(t.v == doctest::Approx(0.5));
  CHECK(t.w == doctest::Approx(0.1 - cfg.k_omega * cfg.theta_max / 2));

  t = map_to_unicycle(Vec2(0.2, 0), Vec2::Zero(), 0.3, cfg);
  CHECK(t.v == doctest::Approx(0.2));
  CHECK(t.w == 0.3);

  // Non-negative and non-increasing in |dtheta|.
  double prev = 1e9;
  for (int i = 0; i <= 100; ++i) {
    const double v = map_to_unicycle(unit_vector(i * pi / 100), ur, 0.0, cfg).v;
    CHECK(v >= 0.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("filter") {
  const CbfConfig cfg;
  const ZbfModel m = strip_barrier();

  // Deep inside (h = 12), command passes unchanged.
  auto f = filter({0.4, 0.2}, Pose2(0, -1, pi / 4), m, cfg);
  CHECK(f.cmd.v == 0.4);
  CHECK(f.cmd.w == 0.2);
  CHECK_FALSE(f.intervened);

  // On the zero level heading outward: slower, turning toward the gradient (-y).
  f = filter({0.4, 0.0}, Pose2(0, 0.2, 0.5), m, cfg);
  CHECK(f.intervened);
  CHECK(f.cmd.v < 0.4);
  CHECK(f.cmd.w < 0.0);

  f = filter({0.0, 0.5}, Pose2(0, 0.2, 0.5), m, cfg);
  CHECK(f.cmd.v == 0.0);
  CHECK(f.cmd.w == 0.5);
}
