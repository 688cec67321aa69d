#include "gapnav/sim/robot.hpp"

#include "gapnav/nmpc.hpp"

#include <algorithm>
#include <stdexcept>

namespace gapnav::sim {

RobotOrder parse_robot_order(const std::string& s) {
  if (s == "first") return RobotOrder::first;
  if (s == "second") return RobotOrder::second;
  throw std::invalid_argument("unknown robot order: " + s);
}

RobotState step_robot(const RobotState& state, const Twist& cmd, double dt, const RobotModel& model) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_robot: dt must be positive");
  Twist target{std::clamp(cmd.v, model.v_lb.v, model.v_ub.v), std::clamp(cmd.w, model.v_lb.w, model.v_ub.w)};
  RobotState next;
  if (model.order == RobotOrder::first) {
    next.vel = target;
  } else {
    const double dv = model.a_bounds.v * dt, dw = model.a_bounds.w * dt;
    next.vel.v = std::clamp(target.v, state.vel.v - dv, state.vel.v + dv);
    next.vel.w = std::clamp(target.w, state.vel.w - dw, state.vel.w + dw);
  }
  next.pose = unicycle_step(state.pose, next.vel, dt);
  return next;
}

}  // namespace gapnav::sim
