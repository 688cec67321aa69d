#pragma once

#include "gapnav/sim/world.hpp"

#include <optional>
#include <vector>

namespace gapnav::sim {

/// Occupancy grid rasterized from the known world, inflated by `inflation`. Shortest
/// paths come from an exact cost-to-go field toward the goal (Dijkstra, 8-connected),
/// which is the perfect heuristic for A*: descending it reproduces A*'s path.
class GlobalPlanner {
 public:
  GlobalPlanner(const World& w, double inflation, double resolution = 0.1);

  bool free(const Vec2& p) const;
  bool line_of_sight(const Vec2& a, const Vec2& b) const;
  double cost_to_go(const Vec2& p) const;

  /// Grid path from `from` to the goal; empty when the goal is unreachable.
  std::vector<Vec2> path(const Vec2& from) const;

  /// Farthest visible path point within `horizon`; empty when no grid path exists.
  std::optional<Vec2> waypoint(const Vec2& position, double horizon) const;

  double resolution() const { return res_; }

 private:
  long index(long i, long j) const { return j * nx_ + i; }
  bool cell_of(const Vec2& p, long& i, long& j) const;
  Vec2 center(long i, long j) const;
  std::optional<long> nearest_free(const Vec2& p) const;

  Vec2 lo_;
  Vec2 goal_;
  double res_;
  long nx_ = 0, ny_ = 0;
  std::vector<char> occupied_;
  std::vector<double> cost_;
};

}  // namespace gapnav::sim
