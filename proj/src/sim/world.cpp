#include "gapnav/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gapnav::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double polygon_distance(const ConvexPolygon& poly, const Vec2& p) {
  if (poly.contains(p, 0.0)) return 0.0;
  double d = kInf;
  for (std::size_t i = 0; i < poly.size(); ++i) d = std::min(d, point_segment_distance(p, poly.edge(i)));
  return d;
}

double bounds_distance(const Bounds& b, const Vec2& p) {
  if (!b.contains(p)) return 0.0;
  return std::min({p.x() - b.lo.x(), b.hi.x() - p.x(), p.y() - b.lo.y(), b.hi.y() - p.y()});
}

// Smallest t >= 0 with origin + t*dir on the segment.
double ray_segment(const Vec2& o, const Vec2& dir, const Segment& s) {
  const Vec2 e = s.b - s.a;
  const double den = cross2(dir, e);
  if (std::abs(den) < 1e-15) return kInf;
  const Vec2 ao = s.a - o;
  const double t = cross2(ao, e) / den;
  const double u = cross2(ao, dir) / den;
  if (t < 0.0 || u < -1e-12 || u > 1.0 + 1e-12) return kInf;
  return t;
}

double ray_disc(const Vec2& o, const Vec2& dir, const Disc& d) {
  const Vec2 oc = d.center - o;
  const double b = dir.dot(oc);
  const double c = oc.squaredNorm() - d.radius * d.radius;
  if (c <= 0.0) return 0.0;
  const double disc = b * b - c;
  if (disc < 0.0 || b < 0.0) return kInf;
  const double t = b - std::sqrt(disc);
  return t >= 0.0 ? t : kInf;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * double(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

ConvexPolygon rect(double x0, double y0, double x1, double y1) {
  return ConvexPolygon({Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)});
}

// Annular wall between radii r0 < r1 over [a0, a1], split into chords.
void arc_wall(std::vector<ConvexPolygon>& out, double r0, double r1, double a0, double a1, int pieces) {
  for (int i = 0; i < pieces; ++i) {
    const double a = a0 + (a1 - a0) * i / pieces, b = a0 + (a1 - a0) * (i + 1) / pieces;
    out.emplace_back(std::vector<Vec2>{r0 * unit_vector(a), r0 * unit_vector(b), r1 * unit_vector(b), r1 * unit_vector(a)});
  }
}

struct Layout {
  World world;
  Bounds sample_box;
  double area = 0.0;
};

constexpr double kSectorIn = 3.0, kSectorOut = 7.0, kWall = 0.1;

Layout layout(WorldKind kind) {
  Layout l;
  World& w = l.world;
  switch (kind) {
    case WorldKind::dense:
      w.bounds = {Vec2(0, 0), Vec2(12, 12)};
      w.start = Pose2(1.0, 1.0, std::numbers::pi / 4.0);
      w.goal = Vec2(11.0, 11.0);
      l.sample_box = w.bounds;
      l.area = 144.0;
      break;
    case WorldKind::sector: {
      w.bounds = {Vec2(-1, -1), Vec2(8, 8)};
      const double half_pi = std::numbers::pi / 2.0;
      arc_wall(w.polygons, kSectorIn - kWall, kSectorIn, 0.0, half_pi, 18);
      arc_wall(w.polygons, kSectorOut, kSectorOut + kWall, 0.0, half_pi, 18);
      w.polygons.push_back(rect(kSectorIn - kWall, -kWall, kSectorOut + kWall, 0.0));
      w.polygons.push_back(rect(-kWall, kSectorIn - kWall, 0.0, kSectorOut + kWall));
      const double rm = 0.5 * (kSectorIn + kSectorOut);
      w.start = Pose2(rm, 0.8, half_pi);
      w.goal = Vec2(0.8, rm);
      l.sample_box = {Vec2(0, 0), Vec2(kSectorOut, kSectorOut)};
      l.area = 0.25 * std::numbers::pi * (kSectorOut * kSectorOut - kSectorIn * kSectorIn);
      break;
    }
    case WorldKind::campus_like:
      w.bounds = {Vec2(0, 0), Vec2(16, 16)};
      for (double x : {2.0, 9.0})
        for (double y : {2.0, 9.0}) w.polygons.push_back(rect(x, y, x + 5.0, y + 5.0));
      w.start = Pose2(1.0, 1.0, 0.0);
      w.goal = Vec2(15.0, 15.0);
      l.sample_box = w.bounds;
      l.area = 256.0 - 100.0;
      break;
    case WorldKind::office_like: {
      w.bounds = {Vec2(0, 0), Vec2(14, 10)};
      const double t = kWall;
      // Hallway walls at y = 4 and y = 6, one 1.2 m doorway per room.
      for (double y : {4.0, 6.0}) {
        const double xs[] = {0.0, 1.7, 2.9, 6.3, 7.5, 11.0, 12.2, 14.0};
        for (int i = 0; i + 1 < 8; i += 2) w.polygons.push_back(rect(xs[i], y - t / 2, xs[i + 1], y + t / 2));
      }
      for (double x : {14.0 / 3.0, 28.0 / 3.0}) {
        w.polygons.push_back(rect(x - t / 2, 0.0, x + t / 2, 4.0 - t / 2));
        w.polygons.push_back(rect(x - t / 2, 6.0 + t / 2, x + t / 2, 10.0));
      }
      w.start = Pose2(1.5, 1.5, std::numbers::pi / 2.0);
      w.goal = Vec2(12.5, 8.5);
      l.sample_box = w.bounds;
      l.area = 140.0;
      break;
    }
  }
  return l;
}

}  // namespace

double clearance(const World& w, const Vec2& p) {
  double d = bounds_distance(w.bounds, p);
  for (const auto& disc : w.discs) d = std::min(d, std::max(0.0, (p - disc.center).norm() - disc.radius));
  for (const auto& poly : w.polygons) d = std::min(d, polygon_distance(poly, p));
  return d;
}

bool check_collision(const World& w, const Vec2& position, double radius) { return clearance(w, position) < radius; }

double raycast(const World& w, const Vec2& origin, double angle, double max_range) {
  const Vec2 dir = unit_vector(angle);
  double t = max_range;
  const Vec2 lo = w.bounds.lo, hi = w.bounds.hi;
  for (int a = 0; a < 2; ++a) {
    if (dir(a) > 1e-15) t = std::min(t, (hi(a) - origin(a)) / dir(a));
    else if (dir(a) < -1e-15) t = std::min(t, (lo(a) - origin(a)) / dir(a));
  }
  for (const auto& d : w.discs) t = std::min(t, ray_disc(origin, dir, d));
  for (const auto& poly : w.polygons)
    for (std::size_t i = 0; i < poly.size(); ++i) t = std::min(t, ray_segment(origin, dir, poly.edge(i)));
  return std::max(t, 0.0);
}

WorldKind parse_world_kind(const std::string& s) {
  if (s == "sector") return WorldKind::sector;
  if (s == "dense") return WorldKind::dense;
  if (s == "campus_like") return WorldKind::campus_like;
  if (s == "office_like") return WorldKind::office_like;
  throw WorldError("unknown world kind: " + s);
}

std::string to_string(WorldKind k) {
  switch (k) {
    case WorldKind::sector: return "sector";
    case WorldKind::dense: return "dense";
    case WorldKind::campus_like: return "campus_like";
    case WorldKind::office_like: return "office_like";
  }
  return "unknown";
}

int target_obstacle_count(WorldKind kind, double density) {
  if (density < 0.0) throw WorldError("density must be non-negative");
  return int(std::floor(density * layout(kind).area));
}

World generate_world(WorldKind kind, std::uint64_t seed, double density, const GeneratorOptions& opt) {
  Layout l = layout(kind);
  World& w = l.world;
  const int target = target_obstacle_count(kind, density);
  Rng rng(seed);
  int attempts = 0;
  while (int(w.discs.size()) < target && attempts < opt.max_attempts) {
    ++attempts;
    const Vec2 c(rng.uniform(l.sample_box.lo.x(), l.sample_box.hi.x()),
                 rng.uniform(l.sample_box.lo.y(), l.sample_box.hi.y()));
    const double r = rng.uniform(opt.r_min, opt.r_max);
    if (kind == WorldKind::sector) {
      const double rho = c.norm();
      if (c.x() < 0.0 || c.y() < 0.0 || rho < kSectorIn || rho > kSectorOut) continue;
    }
    if (clearance(w, c) < opt.min_spacing + r) continue;
    if ((c - w.start.position()).norm() < opt.endpoint_clearance + r) continue;
    if ((c - w.goal).norm() < opt.endpoint_clearance + r) continue;
    w.discs.emplace_back(c, r);
  }
  if (double(w.discs.size()) < 0.8 * target) throw WorldError("generate_world: density infeasible for the layout");
  return w;
}

nlohmann::json to_json(const World& w) {
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& d : w.discs)
    obs.push_back({{"type", "disc"}, {"params", {{"center", {d.center.x(), d.center.y()}}, {"radius", d.radius}}}});
  for (const auto& p : w.polygons) {
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& v : p.vertices()) verts.push_back({v.x(), v.y()});
    obs.push_back({{"type", "polygon"}, {"params", {{"vertices", verts}}}});
  }
  return {{"bounds", {{"lo", {w.bounds.lo.x(), w.bounds.lo.y()}}, {"hi", {w.bounds.hi.x(), w.bounds.hi.y()}}}},
          {"obstacles", obs},
          {"start", {w.start.x1, w.start.x2, w.start.theta}},
          {"goal", {w.goal.x(), w.goal.y()}}};
}

namespace {

Vec2 vec(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

World world_from_json(const nlohmann::json& j) {
  try {
    World w;
    w.bounds = {vec(j.at("bounds").at("lo")), vec(j.at("bounds").at("hi"))};
    if (!(w.bounds.lo.array() < w.bounds.hi.array()).all()) throw WorldError("world: empty bounds");
    for (const auto& o : j.at("obstacles")) {
      const std::string type = o.at("type").get<std::string>();
      const auto& p = o.at("params");
      if (type == "disc") {
        w.discs.emplace_back(vec(p.at("center")), p.at("radius").get<double>());
      } else if (type == "polygon") {
        std::vector<Vec2> verts;
        for (const auto& v : p.at("vertices")) verts.push_back(vec(v));
        w.polygons.emplace_back(std::move(verts));
      } else {
        throw WorldError("world: unknown obstacle type " + type);
      }
    }
    const auto& s = j.at("start");
    w.start = Pose2(s.at(0).get<double>(), s.at(1).get<double>(), s.size() > 2 ? s.at(2).get<double>() : 0.0);
    w.goal = vec(j.at("goal"));
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw WorldError(std::string("world: malformed document: ") + e.what());
  } catch (const GeometryError& e) {
    throw WorldError(std::string("world: ") + e.what());
  }
}

}  // namespace gapnav::sim
