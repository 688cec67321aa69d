#pragma once

#include "gapnav/bezier.hpp"
#include "gapnav/geometry.hpp"
#include "gapnav/zbf.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gapnav {

struct ReferenceTrajectory {
  std::vector<Pose2> poses;
  std::vector<Twist> twists;
  double dt = 0.1;

  std::size_t size() const { return poses.size(); }
  /// Entries [start, start + n), padded with the final pose at zero twist.
  ReferenceTrajectory window(std::size_t start, std::size_t n) const;
};

/// Arclength sampling at ~v_d*dt spacing. Throws GeometryError for a zero-length path.
ReferenceTrajectory time_parameterize(const JoinedBezierPath& path, double v_d, double dt);

/// Forward Euler unicycle.
Pose2 unicycle_step(const Pose2& x, const Twist& u, double dt);

struct NmpcConfig {
  int N = 6;
  double dt = 0.1;
  Eigen::Vector3d Q{10.0, 10.0, 1.0};
  Eigen::Vector2d R{1.0, 0.1};
  Twist u_lb{0.0, -1.5};
  Twist u_ub{0.5, 1.5};
  /// Per-step bounds on |u(k+1) - u(k)|; only the upper bound binds.
  Twist a_lb{0.0, 0.0};
  Twist a_ub{0.1, 0.3};
  int max_iters = 20;
  double tol = 1e-6;
  double slack_penalty = 1e4;
  double trust_radius = 1.0;
};

enum class NmpcStatus { converged, max_iters, infeasible_relaxed };

std::string to_string(NmpcStatus s);

struct NmpcSolution {
  std::vector<Twist> controls;
  std::vector<Pose2> predicted_states;
  double cost = 0.0;
  NmpcStatus status = NmpcStatus::max_iters;
  int iterations = 0;
};

std::vector<Pose2> rollout(const Pose2& x0, const std::vector<Twist>& controls, double dt);

/// Tracking cost  sum_{k<N} |x_k - xref_k|_Q^2 + |u_k - uref_k|_R^2  with wrapped heading error.
double tracking_cost(const std::vector<Pose2>& states, const std::vector<Twist>& controls,
                     const ReferenceTrajectory& ref, const NmpcConfig& cfg);

/// SQP over the control sequence with h(x_k) >= 0 for k = 1..N when `zbf` is given.
NmpcSolution solve(const Pose2& x0, const Twist& u_prev, const ReferenceTrajectory& ref_window, const ZbfModel* zbf,
                   const NmpcConfig& cfg, const NmpcSolution* warm = nullptr);

}  // namespace gapnav
