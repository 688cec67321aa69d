#include "gapnav/bezier.hpp"

#include <algorithm>
#include <cmath>

namespace gapnav {

JoinedBezierPath JoinedBezierPath::transformed(const Pose2& frame) const {
  JoinedBezierPath out = *this;
  for (auto& p : out.first.p) p = frame.to_world(p);
  if (out.second)
    for (auto& q : out.second->q) q = frame.to_world(q);
  out.arc_point = frame.to_world(arc_point);
  out.local_goal = frame.to_world(local_goal);
  out.theta0 = normalize_angle(theta0 + frame.theta);
  return out;
}

Vec2 biased_arc_point(const InflatedKeyhole& k, const Vec2& goal, const Pose2& pose0) {
  if ((k.arc_left - k.arc_right).norm() < 1e-12) throw GeometryError("biased_arc_point: degenerate arc");
  const Vec2 c = k.circle.center;
  const double two_pi = 2.0 * std::numbers::pi;
  const double a_left = bearing(k.arc_left - c);
  const double span = std::fmod(bearing(k.arc_right - c) - a_left + two_pi, two_pi);
  const Vec2 rel = goal - pose0.position();
  double offset = rel.norm() > 0.0 ? std::fmod(bearing(rel) - a_left + 2.0 * two_pi, two_pi) : 0.5 * span;
  if (offset > span) offset = (offset - span < two_pi - offset) ? span : 0.0;
  if (offset == 0.0) return k.arc_left;
  if (offset == span) return k.arc_right;
  return c + k.circle.radius * unit_vector(a_left + offset);
}

CubicSegment first_segment(const Pose2& pose0, double v0, const Vec2& a0, const Vec2& x_c, double v_d) {
  if (!(v_d > 0.0)) throw GeometryError("first_segment: desired speed must be positive");
  const Vec2 x0 = pose0.position();
  const double dist = (x_c - x0).norm();
  if (dist == 0.0) throw GeometryError("first_segment: arc point coincides with the start");
  CubicSegment seg;
  seg.tf = dist / v_d;
  if (!std::isfinite(seg.tf)) throw GeometryError("first_segment: non-finite time scale");
  seg.p[0] = x0;
  seg.p[1] = x0 + (seg.tf * v0 / 3.0) * pose0.heading();
  seg.p[2] = (seg.tf * seg.tf / 6.0) * a0 - seg.p[0] + 2.0 * seg.p[1];
  seg.p[3] = x_c;
  return seg;
}

QuadSegment second_segment(const Vec2& x_c, const Vec2& p2_of_first, const Vec2& p3_of_first, const Vec2& goal,
                           double v_d, const InflatedKeyhole& k) {
  if ((p3_of_first - x_c).norm() > 1e-9) throw GeometryError("second_segment: first segment does not end at x_c");
  if (!(v_d > 0.0)) throw GeometryError("second_segment: desired speed must be positive");
  const Vec2 dir = p3_of_first - p2_of_first;
  if (dir.norm() < 1e-12) throw GeometryError("second_segment: junction direction undefined");
  const double dist = (goal - x_c).norm();
  if (dist < 1e-12) throw GeometryError("second_segment: goal coincides with x_c");
  if (!k.has_polygon() || !k.polygon.contains(goal)) throw GeometryError("second_segment: goal outside the polygon");
  if (!k.polygon.contains(x_c)) throw GeometryError("second_segment: x_c outside the polygon");

  QuadSegment seg;
  seg.tf = dist / v_d;
  const Vec2 d = dir.normalized();
  const double full = seg.tf * v_d / 2.0;
  auto q1 = [&](double lambda) -> Vec2 { return x_c + lambda * full * d; };
  double lambda = 1.0;
  if (!k.polygon.contains(q1(1.0), 0.0)) {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      (k.polygon.contains(q1(mid), 0.0) ? lo : hi) = mid;
    }
    lambda = lo;
    if (lambda <= 0.0) throw GeometryError("second_segment: no positive length scale keeps q1 inside");
  }
  seg.lambda = lambda;
  seg.q = {x_c, q1(lambda), goal};
  return seg;
}

namespace {

// Pulls p2 back toward 2*p1 - p0 until the cubic's control points sit in the disc.
void fit_acceleration_term(CubicSegment& seg, const Disc& disc) {
  if (disc.contains(seg.p[2])) return;
  const Vec2 base = 2.0 * seg.p[1] - seg.p[0];
  if (!disc.contains(base) || !disc.contains(seg.p[1]))
    throw GeometryError("synthesize: initial velocity leaves the circle");
  const Vec2 accel = seg.p[2] - base;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (disc.contains(base + mid * accel, 0.0) ? lo : hi) = mid;
  }
  seg.p[2] = base + lo * accel;
}

}  // namespace

JoinedBezierPath synthesize(const InflatedKeyhole& k, const Vec2& goal, const Pose2& pose0, double v0, const Vec2& a0,
                            double v_d) {
  if (!k.contains(goal)) throw GeometryError("synthesize: goal outside the inflated keyhole");
  JoinedBezierPath path;
  path.local_goal = goal;
  path.theta0 = pose0.theta;
  const bool single = k.circle.contains(goal);
  path.arc_point = single ? goal : biased_arc_point(k, goal, pose0);
  path.first = first_segment(pose0, v0, a0, path.arc_point, v_d);
  fit_acceleration_term(path.first, k.circle);
  for (const auto& p : path.first.p)
    if (!k.circle.contains(p)) throw GeometryError("synthesize: cubic control point outside the circle");
  if (!single) {
    path.second = second_segment(path.arc_point, path.first.p[2], path.first.p[3], goal, v_d, k);
    for (const auto& q : path.second->q)
      if (!k.polygon.contains(q)) throw GeometryError("synthesize: quadratic control point outside the polygon");
  }
  return path;
}

namespace {

struct SegmentParam {
  bool second;
  double u;
};

SegmentParam locate(const JoinedBezierPath& path, double s) {
  s = std::clamp(s, 0.0, 1.0);
  if (!path.second) return {false, s};
  const double t = s * path.duration();
  if (t <= path.first.tf) return {false, t / path.first.tf};
  return {true, std::min(1.0, (t - path.first.tf) / path.second->tf)};
}

}  // namespace

Vec2 path_position(const JoinedBezierPath& path, double s) {
  const auto loc = locate(path, s);
  return loc.second ? bezier_point(path.second->q, loc.u) : bezier_point(path.first.p, loc.u);
}

Pose2 evaluate(const JoinedBezierPath& path, double s) {
  const auto loc = locate(path, s);
  const Vec2 pos = loc.second ? bezier_point(path.second->q, loc.u) : bezier_point(path.first.p, loc.u);
  Vec2 tangent = loc.second ? bezier_derivative(path.second->q, loc.u) : bezier_derivative(path.first.p, loc.u);
  if (tangent.norm() < 1e-12) return {pos, path.theta0};
  return {pos, bearing(tangent)};
}

double obstacle_cost(double d, const ScoreWeights& w) {
  if (d > w.r_max) return 0.0;
  if (d > w.r_ins) return w.c_obs * std::exp(-w.w_decay * (d - w.r_ins));
  return std::numeric_limits<double>::infinity();
}

double score(const JoinedBezierPath& path, const std::vector<Vec2>& obstacles, const Vec2& local_goal, double theta0,
             const ScoreWeights& w, std::size_t n_samples) {
  if (n_samples < 2) throw GeometryError("score: need at least two samples");
  double cost = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vec2 x = path_position(path, double(i) / double(n_samples - 1));
    double d = std::numeric_limits<double>::infinity();
    for (const auto& o : obstacles) d = std::min(d, (o - x).squaredNorm());
    cost += obstacle_cost(std::sqrt(d), w);
    if (std::isinf(cost)) return cost;
  }
  const Pose2 end = evaluate(path, 1.0);
  cost += w.w1 * (end.position() - local_goal).norm();
  cost += w.w_theta * std::abs(normalize_angle(end.theta - theta0));
  return cost;
}

double score(const JoinedBezierPath& path, const EgoCircle& scan, const Pose2& local_goal_pose, const Pose2& pose0,
             const ScoreWeights& w, std::size_t n_samples) {
  std::vector<Vec2> obstacles;
  obstacles.reserve(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i)
    if (!scan.is_max(i)) obstacles.push_back(beam_point(scan, i));
  return score(path, obstacles, local_goal_pose.position(), pose0.theta, w, n_samples);
}

std::optional<Selection> select(const std::vector<double>& candidate_scores, std::optional<double> previous_score,
                                double switch_ratio) {
  std::optional<Selection> best;
  for (std::size_t i = 0; i < candidate_scores.size(); ++i) {
    const double s = candidate_scores[i];
    if (std::isfinite(s) && (!best || s < best->score)) best = Selection{false, i, s};
  }
  const bool prev_valid = previous_score && std::isfinite(*previous_score);
  if (!prev_valid) return best;
  if (!best || !(best->score < switch_ratio * *previous_score)) return Selection{true, 0, *previous_score};
  return best;
}

}  // namespace gapnav
