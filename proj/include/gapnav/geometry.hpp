#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gapnav {

using Vec2 = Eigen::Vector2d;

/// Thrown when an operation's precondition does not hold.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar normalize_angle(Scalar a) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  a = std::remainder(a, Scalar(2) * kPi);
  if (a <= -kPi) a += Scalar(2) * kPi;
  return a;
}

template <typename Derived>
typename Derived::Scalar cross2(const Eigen::MatrixBase<Derived>& a,
                                const Eigen::MatrixBase<Derived>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Left-hand perpendicular (rotation by +90 degrees).
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline double bearing(const Vec2& v) { return std::atan2(v.y(), v.x()); }

struct Pose2 {
  double x1 = 0.0;
  double x2 = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x, double y, double th) : x1(x), x2(y), theta(normalize_angle(th)) {}
  Pose2(const Vec2& p, double th) : Pose2(p.x(), p.y(), th) {}

  Vec2 position() const { return {x1, x2}; }
  Vec2 heading() const { return unit_vector(theta); }

  /// Maps a point expressed in this pose's frame into the parent frame.
  Vec2 to_world(const Vec2& local) const { return position() + rotate(local, theta); }
  Vec2 to_local(const Vec2& world) const { return rotate(world - position(), -theta); }
  Pose2 to_world(const Pose2& local) const {
    return {to_world(local.position()), theta + local.theta};
  }
  Pose2 to_local(const Pose2& world) const {
    return {to_local(world.position()), world.theta - theta};
  }
};

struct Twist {
  double v = 0.0;
  double w = 0.0;
};

struct Disc {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;

  Disc() = default;
  Disc(const Vec2& c, double r) : center(c), radius(r) {
    if (!(r >= 0.0)) throw GeometryError("Disc: negative radius");
  }

  bool contains(const Vec2& p, double tol = 1e-9) const {
    return (p - center).norm() <= radius + tol;
  }
};

struct Segment {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();

  double length() const { return (b - a).norm(); }
  Vec2 at(double t) const { return a + t * (b - a); }
};

double point_segment_distance(const Vec2& p, const Segment& s);

/// Closest point of `s` to `p`.
Vec2 closest_point(const Segment& s, const Vec2& p);

/// Oriented line {x : n.x + d = 0} with unit normal `n`; positive side is n.x + d > 0.
struct Line {
  Vec2 n = Vec2::UnitX();
  double d = 0.0;

  static Line through(const Vec2& a, const Vec2& b);
  double signed_distance(const Vec2& p) const { return n.dot(p) + d; }
  Line flipped() const { return {-n, -d}; }
  /// Moves the line by `offset` along its normal (toward the positive side).
  Line shifted(double offset) const { return {n, d - offset}; }
  Line oriented_toward(const Vec2& p) const { return signed_distance(p) >= 0.0 ? *this : flipped(); }
};

std::optional<Vec2> intersect(const Line& l1, const Line& l2);

/// Intersections of a line with a circle, ordered along the line direction perp(-n).
std::vector<Vec2> line_circle_intersections(const Line& l, const Disc& d, double tangent_tol = 1e-12);

class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  /// Reorders to counter-clockwise; throws if fewer than 3 vertices or not convex.
  explicit ConvexPolygon(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }
  Segment edge(std::size_t i) const { return {vertices_[i], vertices_[(i + 1) % size()]}; }
  /// Inward-facing supporting line of edge i.
  Line edge_line(std::size_t i) const;

  double area() const;
  Vec2 centroid() const;
  bool contains(const Vec2& p, double tol = 1e-9) const;
  /// Signed distance to the boundary: positive inside.
  double inner_distance(const Vec2& p) const;
  Vec2 closest_point(const Vec2& p) const;
  /// Miter offset of every edge inward by `inset`; throws if the result collapses.
  ConvexPolygon inset(double inset) const;

  static bool is_convex_ccw(const std::vector<Vec2>& v, double tol = 1e-9);

 private:
  std::vector<Vec2> vertices_;
};

class EgoCircle {
 public:
  EgoCircle() = default;
  EgoCircle(std::vector<double> ranges, double angle_min, double angle_increment, double max_range);

  std::size_t size() const { return ranges_.size(); }
  const std::vector<double>& ranges() const { return ranges_; }
  double range(std::size_t i) const { return ranges_.at(i); }
  double angle_min() const { return angle_min_; }
  double angle_increment() const { return angle_increment_; }
  double max_range() const { return max_range_; }
  double angle(std::size_t i) const { return normalize_angle(angle_min_ + double(i) * angle_increment_); }
  bool is_max(std::size_t i) const { return ranges_[i] >= max_range_ - 1e-9; }
  /// True if the beams cover the whole circle, so index arithmetic wraps around.
  bool wraps() const;

 private:
  std::vector<double> ranges_;
  double angle_min_ = 0.0;
  double angle_increment_ = 0.0;
  double max_range_ = 0.0;
};

Vec2 beam_point(const EgoCircle& scan, std::size_t i);

/// Largest collision-free disc centered on the sensor origin.
Disc largest_centered_disc(const EgoCircle& scan);

/// Tangent points on `d` of the two tangent lines through `p`, ordered by polar angle about the center.
std::pair<Vec2, Vec2> tangent_points(const Disc& d, const Vec2& p);

std::vector<Vec2> segment_disc_intersections(const Segment& s, const Disc& d);

/// Closed-set membership in `poly` union `disc`. An empty polygon means the disc alone.
bool point_in_region(const Vec2& x, const ConvexPolygon& poly, const Disc& disc, double tol = 1e-9);

}  // namespace gapnav
