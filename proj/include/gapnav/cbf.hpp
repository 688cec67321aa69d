#pragma once

#include "gapnav/geometry.hpp"
#include "gapnav/zbf.hpp"

namespace gapnav {

struct CbfConfig {
  double gamma = 1.0;
  double k_omega = 2.0;
  double theta_max = std::numbers::pi / 3.0;
  /// Per-axis box |u_i| <= v_bound on the single-integrator velocity.
  double v_bound = 0.5;
};

struct CbfQpResult {
  Vec2 u = Vec2::Zero();
  bool feasible = true;
  bool active = false;  // barrier row binding
};

/// min |u - u_r|^2  s.t.  grad_h.u >= -gamma*h,  |u_i| <= v_bound.
CbfQpResult solve_cbf_qp(const Vec2& u_r, double h, const Vec2& grad_h, const CbfConfig& cfg);

CbfQpResult solve_qp(const Vec2& u_r, const Vec2& x, const ZbfModel& zbf, const CbfConfig& cfg);

Twist map_to_unicycle(const Vec2& u_safe, const Vec2& u_r_vec, double w_r, const CbfConfig& cfg);

struct FilterResult {
  Twist cmd;
  bool intervened = false;
  bool violation = false;
};

FilterResult filter(const Twist& nmpc_cmd, const Pose2& pose, const ZbfModel& zbf, const CbfConfig& cfg);

}  // namespace gapnav
