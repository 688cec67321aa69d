#pragma once
// Randomized inputs shared by unit tests and the acceptance binary.

#include "gapnav/sim/planner.hpp"
#include "gapnav/sim/sensor.hpp"
#include "gapnav/sim/world.hpp"

#include <numbers>
#include <random>
#include <vector>

namespace fixture {

using namespace gapnav;

struct KeyholeCase {
  EgoCircle scan;
  InflatedKeyhole keyhole;
  Vec2 goal;  // robot frame, inside the inflated region
};

// Eroded gap keyholes seen from random clear poses in seeded dense worlds. Goals are
// drawn uniformly from the region; every other case prefers a goal out in the polygon.
inline std::vector<KeyholeCase> random_keyholes(std::size_t n, std::uint64_t seed, double robot_radius = 0.2) {
  std::vector<KeyholeCase> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> T(-std::numbers::pi, std::numbers::pi), U(-6.0, 6.0);
  for (std::uint64_t ws = seed * 1000; out.size() < n; ++ws) {
    const auto w = sim::generate_world(sim::WorldKind::dense, ws, 0.12);
    std::uniform_real_distribution<double> X(w.bounds.lo.x() + 1, w.bounds.hi.x() - 1),
        Y(w.bounds.lo.y() + 1, w.bounds.hi.y() - 1);
    const Pose2 pose(X(rng), Y(rng), T(rng));
    if (sim::clearance(w, pose.position()) < 0.5) continue;
    const EgoCircle scan = sim::raycast_scan(w, pose, {});
    for (const auto& k : sim::build_keyholes(scan, robot_radius)) {
      if (!k.has_polygon() || out.size() >= n) continue;
      const bool want_polygon = out.size() % 2 == 0;
      for (int tries = 0; tries < 20000; ++tries) {
        const Vec2 g(U(rng), U(rng));
        if (!k.contains(g, 0.0)) continue;
        if (want_polygon && k.circle.contains(g) && tries < 19000) continue;
        out.push_back({scan, k, g});
        break;
      }
    }
  }
  return out;
}

}  // namespace fixture
