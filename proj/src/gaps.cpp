#include "gapnav/gaps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace gapnav {

GapDetectionParams GapDetectionParams::for_robot(double robot_radius, double angle_increment) {
  GapDetectionParams p;
  p.range_jump_threshold = 4.0 * robot_radius;
  p.min_gap_width = 2.0 * robot_radius;
  p.merge_angle = 2.0 * angle_increment;
  return p;
}

namespace {

std::size_t beam_span(const EgoCircle& scan, std::size_t left, std::size_t right) {
  const std::size_t n = scan.size();
  return scan.wraps() ? (right + n - left) % n : right - left;
}

Gap make_gap(const EgoCircle& scan, std::size_t left, std::size_t right) {
  return {beam_point(scan, left), beam_point(scan, right), left, right};
}

// Pairs each rising range discontinuity with the next falling one.
std::vector<Gap> raw_gaps(const EgoCircle& scan, double threshold) {
  const std::size_t n = scan.size();
  const bool wrap = scan.wraps();
  const std::size_t steps = wrap ? 2 * n : n - 1;
  std::vector<Gap> gaps;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::optional<std::size_t> open;
  bool any_event = false;
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t i = k % n, j = (k + 1) % n;
    const bool mi = scan.is_max(i), mj = scan.is_max(j);
    const double ri = scan.range(i), rj = scan.range(j);
    const bool rising = !mi && (mj || rj - ri > threshold);
    const bool falling = !mj && (mi || ri - rj > threshold);
    any_event |= rising || falling;
    if (rising) {
      open = i;
    } else if (falling && open) {
      if (*open != j && seen.emplace(*open, j).second) gaps.push_back(make_gap(scan, *open, j));
      open.reset();
    }
  }
  bool all_max = true;
  for (std::size_t i = 0; i < n; ++i) all_max &= scan.is_max(i);
  if (!any_event && all_max) {
    // Nothing in range: the whole scan is one free interval, split later.
    if (wrap) {
      for (std::size_t q = 0; q < 4; ++q) gaps.push_back(make_gap(scan, q * n / 4, (q + 1) * n / 4 % n));
    } else {
      gaps.push_back(make_gap(scan, 0, n - 1));
    }
  }
  std::sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) { return a.left_index < b.left_index; });
  return gaps;
}

std::vector<Gap> merge_gaps(const EgoCircle& scan, std::vector<Gap> gaps, double merge_angle) {
  if (gaps.size() < 2) return gaps;
  const std::size_t n = scan.size();
  auto separation = [&](const Gap& a, const Gap& b) {
    const std::size_t beams = scan.wraps() ? (b.left_index + n - a.right_index) % n
                                           : (b.left_index >= a.right_index ? b.left_index - a.right_index : n);
    return double(beams) * scan.angle_increment();
  };
  std::vector<Gap> out;
  for (const Gap& g : gaps) {
    if (!out.empty() && separation(out.back(), g) < merge_angle) {
      out.back() = make_gap(scan, out.back().left_index, g.right_index);
    } else {
      out.push_back(g);
    }
  }
  if (scan.wraps() && out.size() > 1 && separation(out.back(), out.front()) < merge_angle) {
    out.front() = make_gap(scan, out.back().left_index, out.front().right_index);
    out.pop_back();
  }
  return out;
}

std::vector<Gap> split_wide(const EgoCircle& scan, const std::vector<Gap>& gaps, double max_span) {
  const std::size_t n = scan.size();
  std::vector<Gap> out;
  for (const Gap& g : gaps) {
    const std::size_t beams = beam_span(scan, g.left_index, g.right_index);
    const double span = double(beams) * scan.angle_increment();
    const auto pieces = std::size_t(std::ceil(span / max_span - 1e-9));
    if (pieces <= 1) {
      out.push_back(g);
      continue;
    }
    for (std::size_t q = 0; q < pieces; ++q) {
      const std::size_t a = (g.left_index + q * beams / pieces) % n;
      const std::size_t b = (g.left_index + (q + 1) * beams / pieces) % n;
      out.push_back(make_gap(scan, a, b));
    }
  }
  return out;
}

}  // namespace

std::vector<Gap> detect_gaps(const EgoCircle& scan, const GapDetectionParams& params) {
  std::vector<Gap> gaps;
  for (const Gap& g : raw_gaps(scan, params.range_jump_threshold))
    if ((g.left_point - g.right_point).norm() >= params.min_gap_width) gaps.push_back(g);
  gaps = merge_gaps(scan, std::move(gaps), params.merge_angle);
  return split_wide(scan, gaps, params.max_span);
}

std::optional<double> ray_segment_radius(double angle, const Segment& s) {
  const Vec2 u = unit_vector(angle);
  const Vec2 e = s.b - s.a;
  const double denom = cross2(u, e);
  const double scale = std::max({1.0, s.a.norm(), s.b.norm()});
  if (std::abs(denom) <= 1e-12 * std::max(1.0, e.norm())) {
    // Segment parallel to the ray: only a collinear segment is hit.
    if (std::abs(cross2(u, s.a)) > 1e-12 * scale) return std::nullopt;
    const double ta = u.dot(s.a), tb = u.dot(s.b);
    if (std::max(ta, tb) < 0.0) return std::nullopt;
    return std::max(0.0, std::min(ta, tb));
  }
  const double t = cross2(s.a, e) / denom;
  const double sp = cross2(s.a, u) / denom;
  if (t < 0.0 || sp < -1e-12 || sp > 1.0 + 1e-12) return std::nullopt;
  return t;
}

namespace {

bool skipped(const std::vector<std::size_t>& skip, std::size_t i) {
  return std::find(skip.begin(), skip.end(), i) != skip.end();
}

// Any beam in the bearing shadow of `s` that sits in front of it lies inside F.
bool beam_in_front(const Segment& s, const EgoCircle& scan, const std::vector<std::size_t>& skip) {
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (scan.is_max(i) || skipped(skip, i)) continue;
    const auto rs = ray_segment_radius(scan.angle_min() + double(i) * scan.angle_increment(), s);
    if (rs && scan.range(i) < *rs - 1e-9) return true;
  }
  return false;
}

Vec2 first_circle_hit(const Vec2& from, const Vec2& dir, const Disc& c) {
  const Segment ray{from, from + dir * (from.norm() + 2.0 * c.radius)};
  const auto hits = segment_disc_intersections(ray, c);
  if (hits.empty()) throw GeometryError("construct_keyhole: rotated side misses the circle");
  return hits.front();
}

}  // namespace

bool segment_obstructed(const Segment& s, const EgoCircle& scan, double clearance,
                        const std::vector<std::size_t>& skip) {
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (scan.is_max(i) || skipped(skip, i)) continue;
    const Vec2 q = beam_point(scan, i);
    if (point_segment_distance(q, s) > clearance) continue;
    const auto rs = ray_segment_radius(scan.angle_min() + double(i) * scan.angle_increment(), s);
    if (rs && q.norm() <= *rs + 1e-12) return true;
  }
  return false;
}

Keyhole construct_keyhole(const Gap& gap, const EgoCircle& scan, double clearance, double rotation_step,
                          double circle_radius) {
  if (rotation_step <= 0.0) rotation_step = scan.angle_increment();
  Disc circle = largest_centered_disc(scan);
  if (circle_radius > 0.0) {
    if (circle_radius > circle.radius) throw GeometryError("construct_keyhole: circle radius exceeds the free disc");
    circle.radius = circle_radius;
  }
  const Vec2 gl = gap.left_point, gr = gap.right_point;
  if (!(gl.norm() > circle.radius * (1.0 + 1e-9)) || !(gr.norm() > circle.radius * (1.0 + 1e-9)))
    throw GeometryError("construct_keyhole: gap endpoint inside the centered disc");

  const std::vector<std::size_t> skip{gap.left_index, gap.right_index};

  // Left side hugs the clockwise tangent and rotates clockwise toward the center; the
  // right side mirrors it.
  auto build_side = [&](const Vec2& g, double sense) -> Segment {
    const double beta = std::acos(circle.radius / g.norm());
    const Vec2 tangent = circle.radius * unit_vector(bearing(g) + sense * beta);
    const Vec2 d0 = (tangent - g).normalized();
    const double max_rotation = std::asin(circle.radius / g.norm());
    for (int k = 0;; ++k) {
      const double angle = std::min(double(k) * rotation_step, max_rotation);
      const bool saturated = angle >= max_rotation;
      const Vec2 dir = saturated ? Vec2(-g.normalized()) : rotate(d0, sense * angle);
      const Vec2 p = saturated ? Vec2(g.normalized() * circle.radius)
                    : k == 0    ? tangent
                                : first_circle_hit(g, dir, circle);
      const Segment side{g, p};
      if (!segment_obstructed(side, scan, clearance, skip) && !beam_in_front(side, scan, skip)) return side;
      if (saturated) throw GeometryError("construct_keyhole: side obstructed at maximum rotation");
    }
  };

  const Segment left = build_side(gl, -1.0);
  const Segment right = build_side(gr, +1.0);

  // Beams between the gap points must lie beyond the far edge.
  const Segment far{gl, gr};
  const std::size_t n = scan.size();
  const std::size_t beams = beam_span(scan, gap.left_index, gap.right_index);
  for (std::size_t q = 1; q < beams; ++q) {
    const std::size_t i = (gap.left_index + q) % n;
    if (scan.is_max(i)) continue;
    const auto rs = ray_segment_radius(scan.angle_min() + double(i) * scan.angle_increment(), far);
    if (rs && scan.range(i) < *rs - 1e-9) throw GeometryError("construct_keyhole: obstacle in front of the gap");
  }

  std::vector<Vec2> quad{gl, gr, right.b, left.b};
  if (!ConvexPolygon::is_convex_ccw(quad)) throw GeometryError("construct_keyhole: polygon not convex");

  Keyhole k;
  k.circle = circle;
  k.polygon = ConvexPolygon(std::move(quad));
  k.side_left = left;
  k.side_right = right;
  k.arc_left = left.b;
  k.arc_right = right.b;
  return k;
}

Keyhole circle_keyhole(const EgoCircle& scan) {
  Keyhole k;
  k.circle = largest_centered_disc(scan);
  return k;
}

double default_margin(const Keyhole& k) { return 0.03 * k.circle.radius; }

InflatedKeyhole inflate_keyhole(const Keyhole& k, double robot_radius, double margin) {
  const double delta = robot_radius + margin;
  if (!(delta < k.circle.radius)) throw GeometryError("inflate_keyhole: inflation collapses the circle");
  InflatedKeyhole out;
  out.inflation = delta;
  out.circle = Disc(k.circle.center, k.circle.radius - delta);
  if (!k.has_polygon()) return out;

  const Vec2 inside = k.polygon.centroid();
  const Line left = Line::through(k.side_left.a, k.side_left.b).oriented_toward(inside).shifted(delta);
  const Line right = Line::through(k.side_right.a, k.side_right.b).oriented_toward(inside).shifted(delta);
  const Line far = Line::through(k.gap_left(), k.gap_right()).oriented_toward(inside).shifted(delta);

  const auto gl = intersect(left, far);
  const auto gr = intersect(right, far);
  if (!gl || !gr) throw GeometryError("inflate_keyhole: parallel side and far edge");

  auto arc_point = [&](const Line& side, const Vec2& g) {
    const auto hits = line_circle_intersections(side, out.circle, 1e-9);
    if (hits.empty()) throw GeometryError("inflate_keyhole: inflated side misses the inflated circle");
    return (hits.front() - g).squaredNorm() <= (hits.back() - g).squaredNorm() ? hits.front() : hits.back();
  };
  const Vec2 pl = arc_point(left, *gl);
  const Vec2 pr = arc_point(right, *gr);

  // Each eroded side must keep its orientation from circle to gap point.
  if ((*gl - pl).dot(k.side_left.a - k.side_left.b) <= 0.0 || (*gr - pr).dot(k.side_right.a - k.side_right.b) <= 0.0)
    throw GeometryError("inflate_keyhole: side collapsed");

  std::vector<Vec2> quad{*gl, *gr, pr, pl};
  if (!ConvexPolygon::is_convex_ccw(quad)) throw GeometryError("inflate_keyhole: inflated polygon not convex");
  for (const auto& v : quad)
    if (!k.contains(v, 1e-9)) throw GeometryError("inflate_keyhole: inflated vertex escapes the keyhole");

  out.polygon = ConvexPolygon(std::move(quad));
  out.side_left = {*gl, pl};
  out.side_right = {*gr, pr};
  out.arc_left = pl;
  out.arc_right = pr;
  return out;
}

InflatedKeyhole transformed(const InflatedKeyhole& k, const Pose2& frame) {
  InflatedKeyhole out;
  out.inflation = k.inflation;
  out.circle = Disc(frame.to_world(k.circle.center), k.circle.radius);
  if (!k.has_polygon()) return out;
  std::vector<Vec2> verts;
  for (const auto& v : k.polygon.vertices()) verts.push_back(frame.to_world(v));
  out.polygon = ConvexPolygon(std::move(verts));
  out.side_left = {frame.to_world(k.side_left.a), frame.to_world(k.side_left.b)};
  out.side_right = {frame.to_world(k.side_right.a), frame.to_world(k.side_right.b)};
  out.arc_left = frame.to_world(k.arc_left);
  out.arc_right = frame.to_world(k.arc_right);
  return out;
}

Vec2 clamp_into(const InflatedKeyhole& k, const Vec2& target) {
  if (k.contains(target, 0.0)) return target;
  constexpr double kInset = 1e-6;
  const Vec2 rel = target - k.circle.center;
  const double rn = rel.norm();
  Vec2 best = rn > 0.0 ? Vec2(k.circle.center + rel / rn * (k.circle.radius * (1.0 - kInset))) : k.circle.center;
  if (k.has_polygon()) {
    Vec2 c = k.polygon.closest_point(target);
    const Vec2 towards = k.polygon.centroid() - c;
    c += kInset * towards;
    if ((c - target).squaredNorm() < (best - target).squaredNorm()) best = c;
  }
  return best;
}

}  // namespace gapnav
