#pragma once

#include "gapnav/geometry.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace gapnav {

struct GapDetectionParams {
  double range_jump_threshold = 0.8;
  double min_gap_width = 0.4;
  double merge_angle = 0.0245;
  /// Gaps spanning a wider bearing interval are split into equal pieces.
  double max_span = std::numbers::pi / 2.0;

  /// Threshold = 2 robot diameters, width = 1 diameter, merge = 2 beams.
  static GapDetectionParams for_robot(double robot_radius, double angle_increment);
};

struct Gap {
  Vec2 left_point = Vec2::Zero();
  Vec2 right_point = Vec2::Zero();
  std::size_t left_index = 0;
  std::size_t right_index = 0;
};

/// Gap endpoints are ordered counter-clockwise: the free bearing interval runs from
/// `left_index` up to `right_index` (modulo the beam count for full-circle scans).
std::vector<Gap> detect_gaps(const EgoCircle& scan, const GapDetectionParams& params);

/// The collision-free region F = polygon U circle built for one gap.
///
/// The polygon is (gap_left, gap_right, arc_right, arc_left); the two sides run from
/// each gap point to its intersection with the circle. A keyhole without a polygon is
/// the circle alone.
struct Keyhole {
  Disc circle;
  ConvexPolygon polygon;
  Segment side_left;
  Segment side_right;
  Vec2 arc_left = Vec2::Zero();
  Vec2 arc_right = Vec2::Zero();

  bool has_polygon() const { return !polygon.empty(); }
  Vec2 gap_left() const { return side_left.a; }
  Vec2 gap_right() const { return side_right.a; }
  bool contains(const Vec2& x, double tol = 1e-9) const { return point_in_region(x, polygon, circle, tol); }
};

struct InflatedKeyhole : Keyhole {
  double inflation = 0.0;
};

/// True iff a (non max-range) beam point lies within `clearance` of `s` and no farther
/// from the origin than the point of `s` on the same bearing. Beams listed in `skip`
/// are ignored.
bool segment_obstructed(const Segment& s, const EgoCircle& scan, double clearance,
                        const std::vector<std::size_t>& skip = {});

/// Polar radius at which the ray from the origin with bearing `angle` meets `s`.
std::optional<double> ray_segment_radius(double angle, const Segment& s);

/// Builds the keyhole for `gap`, rotating obstructed sides inward in steps of
/// `rotation_step` (the scan increment when zero). Throws GeometryError when the gap
/// must be rejected. A positive `circle_radius` replaces the largest free disc with a
/// smaller concentric one.
Keyhole construct_keyhole(const Gap& gap, const EgoCircle& scan, double clearance, double rotation_step = 0.0,
                          double circle_radius = 0.0);

/// The centered disc alone, used when no gap yields a usable keyhole.
Keyhole circle_keyhole(const EgoCircle& scan);

/// Erodes the keyhole by robot_radius + margin. The chord between the arc points is
/// interior to F and is rebuilt from the eroded sides rather than offset.
InflatedKeyhole inflate_keyhole(const Keyhole& k, double robot_radius, double margin);

/// Default erosion margin: 3% of the circle radius.
double default_margin(const Keyhole& k);

InflatedKeyhole transformed(const InflatedKeyhole& k, const Pose2& frame);

/// Nearest point of the inflated region to `target`, nudged strictly inside.
Vec2 clamp_into(const InflatedKeyhole& k, const Vec2& target);

}  // namespace gapnav
