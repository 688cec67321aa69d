#include "gapnav/geometry.hpp"

#include <algorithm>
#include <limits>

namespace gapnav {

double point_segment_distance(const Vec2& p, const Segment& s) {
  return (p - closest_point(s, p)).norm();
}

Vec2 closest_point(const Segment& s, const Vec2& p) {
  const Vec2 ab = s.b - s.a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return s.a;
  const double t = std::clamp((p - s.a).dot(ab) / len2, 0.0, 1.0);
  return s.a + t * ab;
}

Line Line::through(const Vec2& a, const Vec2& b) {
  const Vec2 dir = b - a;
  const double len = dir.norm();
  if (len == 0.0) throw GeometryError("Line::through: coincident points");
  const Vec2 n = perp(dir) / len;
  return {n, -n.dot(a)};
}

std::optional<Vec2> intersect(const Line& l1, const Line& l2) {
  const double det = cross2(l1.n, l2.n);
  if (std::abs(det) < 1e-14) return std::nullopt;
  // n1.x = -d1, n2.x = -d2
  const double x = (-l1.d * l2.n.y() + l2.d * l1.n.y()) / det;
  const double y = (-l2.d * l1.n.x() + l1.d * l2.n.x()) / det;
  return Vec2{x, y};
}

std::vector<Vec2> line_circle_intersections(const Line& l, const Disc& d, double tangent_tol) {
  const double dist = l.signed_distance(d.center);
  const Vec2 foot = d.center - dist * l.n;
  const Vec2 dir = perp(-l.n);
  const double gap = d.radius - std::abs(dist);
  const double scale = std::max(1.0, d.radius);
  if (gap < -tangent_tol * scale) return {};
  // A tangent line's two roots are ill-conditioned (error ~ sqrt(roundoff)); snap to the foot.
  if (gap <= 1e-12 * scale) {
    if (dist == 0.0) return {foot};
    return {Vec2(d.center + (foot - d.center).normalized() * d.radius)};
  }
  const double h = std::sqrt(gap * (d.radius + std::abs(dist)));
  return {foot - h * dir, foot + h * dir};
}

namespace {

double signed_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) a += cross2(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

}  // namespace

bool ConvexPolygon::is_convex_ccw(const std::vector<Vec2>& v, double tol) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = v[(i + 1) % n] - v[i];
    const Vec2 e1 = v[(i + 2) % n] - v[(i + 1) % n];
    if (cross2(e0, e1) < -tol) return false;
  }
  return true;
}

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) throw GeometryError("ConvexPolygon: fewer than 3 vertices");
  if (signed_area(vertices_) < 0.0) std::reverse(vertices_.begin(), vertices_.end());
  if (!is_convex_ccw(vertices_)) throw GeometryError("ConvexPolygon: vertices not in convex position");
}

Line ConvexPolygon::edge_line(std::size_t i) const {
  const Segment e = edge(i);
  // CCW order puts the interior on the left of each edge.
  return Line::through(e.a, e.b);
}

double ConvexPolygon::area() const { return signed_area(vertices_); }

Vec2 ConvexPolygon::centroid() const {
  const double a = area();
  Vec2 c = Vec2::Zero();
  if (std::abs(a) < 1e-15) {
    for (const auto& v : vertices_) c += v;
    return c / double(vertices_.size());
  }
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec2& p = vertices_[i];
    const Vec2& q = vertices_[(i + 1) % size()];
    c += (p + q) * cross2(p, q);
  }
  return c / (6.0 * a);
}

double ConvexPolygon::inner_distance(const Vec2& p) const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size(); ++i) {
    const Segment e = edge(i);
    if (e.length() == 0.0) continue;
    m = std::min(m, edge_line(i).signed_distance(p));
  }
  return m;
}

bool ConvexPolygon::contains(const Vec2& p, double tol) const {
  if (empty()) return false;
  return inner_distance(p) >= -tol;
}

Vec2 ConvexPolygon::closest_point(const Vec2& p) const {
  if (contains(p, 0.0)) return p;
  Vec2 best = vertices_.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec2 c = gapnav::closest_point(edge(i), p);
    const double d = (c - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

ConvexPolygon ConvexPolygon::inset(double inset) const {
  if (inset == 0.0) return *this;
  const std::size_t n = size();
  std::vector<Line> lines;
  lines.reserve(n);
  for (std::size_t i = 0; i < n; ++i) lines.push_back(edge_line(i).shifted(inset));
  std::vector<Vec2> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = intersect(lines[(i + n - 1) % n], lines[i]);
    if (!v) throw GeometryError("ConvexPolygon::inset: parallel consecutive edges");
    out.push_back(*v);
  }
  if (signed_area(out) <= 0.0 || !is_convex_ccw(out)) throw GeometryError("ConvexPolygon::inset: polygon collapsed");
  // A miter vertex that escapes an offset half-plane signals an edge that vanished.
  for (const auto& v : out)
    for (const auto& l : lines)
      if (l.signed_distance(v) < -1e-9) throw GeometryError("ConvexPolygon::inset: polygon collapsed");
  return ConvexPolygon(std::move(out));
}

EgoCircle::EgoCircle(std::vector<double> ranges, double angle_min, double angle_increment, double max_range)
    : ranges_(std::move(ranges)), angle_min_(angle_min), angle_increment_(angle_increment), max_range_(max_range) {
  if (ranges_.size() < 8) throw GeometryError("EgoCircle: fewer than 8 beams");
  if (!(angle_increment_ > 0.0)) throw GeometryError("EgoCircle: non-positive angle increment");
  if (!(max_range_ > 0.0)) throw GeometryError("EgoCircle: non-positive max range");
  for (double& r : ranges_) {
    if (!(r > 0.0) || !std::isfinite(r)) throw GeometryError("EgoCircle: non-positive or non-finite range");
    if (r > max_range_) {
      if (r > max_range_ * (1.0 + 1e-9)) throw GeometryError("EgoCircle: range exceeds max_range");
      r = max_range_;
    }
  }
}

bool EgoCircle::wraps() const {
  return std::abs(double(size()) * angle_increment_ - 2.0 * std::numbers::pi) < 0.5 * angle_increment_;
}

Vec2 beam_point(const EgoCircle& scan, std::size_t i) {
  if (i >= scan.size()) throw GeometryError("beam_point: index out of bounds");
  const double phi = scan.angle_min() + double(i) * scan.angle_increment();
  return scan.range(i) * unit_vector(phi);
}

Disc largest_centered_disc(const EgoCircle& scan) {
  if (scan.size() == 0) throw GeometryError("largest_centered_disc: empty scan");
  return Disc(Vec2::Zero(), *std::min_element(scan.ranges().begin(), scan.ranges().end()));
}

std::pair<Vec2, Vec2> tangent_points(const Disc& d, const Vec2& p) {
  const Vec2 rel = p - d.center;
  const double dist = rel.norm();
  if (!(dist > d.radius)) throw GeometryError("tangent_points: point not strictly outside disc");
  const double base = bearing(rel);
  const double beta = std::acos(d.radius / dist);
  Vec2 t1 = d.center + d.radius * unit_vector(base - beta);
  Vec2 t2 = d.center + d.radius * unit_vector(base + beta);
  if (bearing(t1 - d.center) > bearing(t2 - d.center)) std::swap(t1, t2);
  return {t1, t2};
}

std::vector<Vec2> segment_disc_intersections(const Segment& s, const Disc& d) {
  const Vec2 ab = s.b - s.a;
  const Vec2 ac = s.a - d.center;
  const double A = ab.squaredNorm();
  if (A == 0.0) {
    if (std::abs(ac.norm() - d.radius) <= 1e-12) return {s.a};
    return {};
  }
  const double B = 2.0 * ac.dot(ab);
  const double C = ac.squaredNorm() - d.radius * d.radius;
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return {};
  std::vector<Vec2> out;
  if (disc == 0.0) {
    const double t = -B / (2.0 * A);
    if (t >= 0.0 && t <= 1.0) out.push_back(s.at(t));
    return out;
  }
  const double sq = std::sqrt(disc);
  // Numerically stable root pair.
  const double q = -0.5 * (B + std::copysign(sq, B));
  double t0 = q / A, t1 = C / q;
  if (t0 > t1) std::swap(t0, t1);
  for (double t : {t0, t1})
    if (t >= 0.0 && t <= 1.0) out.push_back(s.at(t));
  return out;
}

bool point_in_region(const Vec2& x, const ConvexPolygon& poly, const Disc& disc, double tol) {
  if (disc.contains(x, tol)) return true;
  return !poly.empty() && poly.contains(x, tol);
}

}  // namespace gapnav
