#pragma once

#include "gapnav/gaps.hpp"
#include "gapnav/geometry.hpp"

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace gapnav {

/// Bernstein-form evaluation of a Bezier curve of degree N-1.
template <typename Point, std::size_t N>
Point bezier_point(const std::array<Point, N>& ctrl, typename Point::Scalar u) {
  using Scalar = typename Point::Scalar;
  constexpr std::size_t n = N - 1;
  Point out = Point::Zero();
  Scalar binom = 1;
  for (std::size_t i = 0; i <= n; ++i) {
    const Scalar b = binom * std::pow(Scalar(1) - u, Scalar(n - i)) * std::pow(u, Scalar(i));
    out += b * ctrl[i];
    binom = binom * Scalar(n - i) / Scalar(i + 1);
  }
  return out;
}

/// First derivative with respect to the curve parameter.
template <typename Point, std::size_t N>
Point bezier_derivative(const std::array<Point, N>& ctrl, typename Point::Scalar u) {
  static_assert(N >= 2);
  std::array<Point, N - 1> diff;
  for (std::size_t i = 0; i + 1 < N; ++i) diff[i] = typename Point::Scalar(N - 1) * (ctrl[i + 1] - ctrl[i]);
  return bezier_point(diff, u);
}

template <typename Point, std::size_t N>
Point bezier_second_derivative(const std::array<Point, N>& ctrl, typename Point::Scalar u) {
  static_assert(N >= 3);
  std::array<Point, N - 1> diff;
  for (std::size_t i = 0; i + 1 < N; ++i) diff[i] = typename Point::Scalar(N - 1) * (ctrl[i + 1] - ctrl[i]);
  return bezier_derivative(diff, u);
}

struct CubicSegment {
  std::array<Vec2, 4> p;
  double tf = 0.0;
};

struct QuadSegment {
  std::array<Vec2, 3> q;
  double tf = 0.0;
  double lambda = 1.0;
};

struct JoinedBezierPath {
  CubicSegment first;
  std::optional<QuadSegment> second;
  Vec2 arc_point = Vec2::Zero();
  Vec2 local_goal = Vec2::Zero();
  /// Heading at the start; held wherever the curve is stationary.
  double theta0 = 0.0;

  double duration() const { return first.tf + (second ? second->tf : 0.0); }
  JoinedBezierPath transformed(const Pose2& frame) const;
};

struct ScoreWeights {
  double w1 = 4.0;
  double w_theta = 0.3;
  double w_decay = 4.0;
  double c_obs = 0.5;
  double r_ins = 0.2;
  double r_max = 1.0;
};

/// Point on the inflated arc between the arc points, at the goal bearing clamped to the arc.
Vec2 biased_arc_point(const InflatedKeyhole& k, const Vec2& goal, const Pose2& pose0);

CubicSegment first_segment(const Pose2& pose0, double v0, const Vec2& a0, const Vec2& x_c, double v_d);

QuadSegment second_segment(const Vec2& x_c, const Vec2& p2_of_first, const Vec2& p3_of_first, const Vec2& goal,
                           double v_d, const InflatedKeyhole& k);

/// Joined cubic (+ quadratic) path from pose0 to `goal` inside the inflated keyhole.
/// Throws GeometryError when no contained path exists.
JoinedBezierPath synthesize(const InflatedKeyhole& k, const Vec2& goal, const Pose2& pose0, double v0, const Vec2& a0,
                            double v_d);

/// Pose at normalized time s in [0,1]; segments share s in proportion to their time scales.
Pose2 evaluate(const JoinedBezierPath& path, double s);

/// Raw position on the path at normalized time s.
Vec2 path_position(const JoinedBezierPath& path, double s);

double obstacle_cost(double d, const ScoreWeights& w);

/// Path cost against obstacle points expressed in the path's frame.
double score(const JoinedBezierPath& path, const std::vector<Vec2>& obstacles, const Vec2& local_goal, double theta0,
             const ScoreWeights& w, std::size_t n_samples = 30);

double score(const JoinedBezierPath& path, const EgoCircle& scan, const Pose2& local_goal_pose, const Pose2& pose0,
             const ScoreWeights& w, std::size_t n_samples = 30);

struct Selection {
  bool keep_previous = false;
  std::size_t index = 0;
  double score = std::numeric_limits<double>::infinity();
};

/// Hysteresis selection. `candidate_scores` are the fresh paths' costs; `previous_score`
/// is the executed path re-scored against the current scan. Empty when nothing is usable.
std::optional<Selection> select(const std::vector<double>& candidate_scores, std::optional<double> previous_score,
                                double switch_ratio = 0.8);

}  // namespace gapnav
