#pragma once

#include "gapnav/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace gapnav::sim {

class WorldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Bounds {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();
  bool contains(const Vec2& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
};

struct World {
  Bounds bounds;
  std::vector<Disc> discs;
  std::vector<ConvexPolygon> polygons;
  Pose2 start;
  Vec2 goal = Vec2::Zero();
};

/// Distance from p to the nearest obstacle surface or bound; 0 inside an obstacle or outside the bounds.
double clearance(const World& w, const Vec2& p);

/// True iff the disc of `radius` at `position` overlaps an obstacle or leaves the bounds (strict).
bool check_collision(const World& w, const Vec2& position, double radius);

/// Nearest hit along the ray; max_range when nothing closer is hit.
double raycast(const World& w, const Vec2& origin, double angle, double max_range);

enum class WorldKind { sector, dense, campus_like, office_like };

WorldKind parse_world_kind(const std::string& s);
std::string to_string(WorldKind k);

struct GeneratorOptions {
  double min_spacing = 1.0;  // surface to surface
  double r_min = 0.15;
  double r_max = 0.35;
  double endpoint_clearance = 1.0;
  int max_attempts = 20000;
};

/// Seeded rejection sampling. `density` is obstacles per square meter of free floor.
World generate_world(WorldKind kind, std::uint64_t seed, double density, const GeneratorOptions& opt = {});

/// Number of discs the generator aims for.
int target_obstacle_count(WorldKind kind, double density);

nlohmann::json to_json(const World& w);
World world_from_json(const nlohmann::json& j);

}  // namespace gapnav::sim
