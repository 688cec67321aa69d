#pragma once

#include "gapnav/geometry.hpp"

#include <string>

namespace gapnav::sim {

enum class RobotOrder { first, second };

struct RobotModel {
  RobotOrder order = RobotOrder::second;
  double radius = 0.2;
  Twist v_lb{0.0, -1.5};
  Twist v_ub{0.5, 1.5};
  /// Magnitude bounds on dv/dt and dw/dt (second order only).
  Twist a_bounds{1.0, 3.0};
};

struct RobotState {
  Pose2 pose;
  Twist vel;
};

RobotOrder parse_robot_order(const std::string& s);

/// Velocities follow the (clamped) command, rate-limited for the second-order model,
/// then the pose takes one Euler step with the new velocities.
RobotState step_robot(const RobotState& state, const Twist& cmd, double dt, const RobotModel& model);

}  // namespace gapnav::sim
