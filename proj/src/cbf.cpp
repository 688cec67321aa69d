#include "gapnav/cbf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace gapnav {

namespace {

// Rows read n.u >= d.
struct HalfPlane {
  Vec2 n;
  double d;
};

}  // namespace

CbfQpResult solve_cbf_qp(const Vec2& u_r, double h, const Vec2& grad_h, const CbfConfig& cfg) {
  const double B = cfg.v_bound;
  const std::array<HalfPlane, 5> rows{{
      {grad_h, -cfg.gamma * h},
      {Vec2(-1.0, 0.0), -B},
      {Vec2(1.0, 0.0), -B},
      {Vec2(0.0, -1.0), -B},
      {Vec2(0.0, 1.0), -B},
  }};
  auto feasible = [&](const Vec2& u) {
    for (const auto& r : rows) {
      const double tol = 1e-12 * (1.0 + std::abs(r.d) + r.n.norm() * u.norm());
      if (r.n.dot(u) < r.d - tol) return false;
    }
    return true;
  };

  CbfQpResult best;
  double best_cost = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec2& u, bool barrier_active) {
    if (!feasible(u)) return;
    const double c = (u - u_r).squaredNorm();
    if (c < best_cost) {
      best_cost = c;
      best.u = u;
      best.active = barrier_active;
    }
  };

  consider(u_r, false);
  for (int i = 0; i < 5; ++i) {
    const auto& r = rows[i];
    const double nn = r.n.squaredNorm();
    if (nn == 0.0) continue;
    consider(u_r + (r.d - r.n.dot(u_r)) / nn * r.n, i == 0);
  }
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      Eigen::Matrix2d M;
      M << rows[i].n.transpose(), rows[j].n.transpose();
      const double det = M.determinant();
      if (std::abs(det) < 1e-14) continue;
      consider(M.inverse() * Vec2(rows[i].d, rows[j].d), i == 0);
    }

  if (std::isfinite(best_cost)) return best;
  // Barrier half-plane misses the box: steepest ascent corner.
  CbfQpResult out;
  out.feasible = false;
  out.active = true;
  for (int a = 0; a < 2; ++a)
    out.u(a) = grad_h(a) > 0.0 ? B : grad_h(a) < 0.0 ? -B : std::clamp(u_r(a), -B, B);
  return out;
}

CbfQpResult solve_qp(const Vec2& u_r, const Vec2& x, const ZbfModel& zbf, const CbfConfig& cfg) {
  const Vec2 g = gradient(zbf, x);
  if (!g.allFinite()) throw std::invalid_argument("solve_qp: non-finite barrier gradient");
  return solve_cbf_qp(u_r, eval(zbf, x), g, cfg);
}

Twist map_to_unicycle(const Vec2& u_safe, const Vec2& u_r_vec, double w_r, const CbfConfig& cfg) {
  double dtheta = 0.0;
  if (u_safe.norm() > 0.0 && u_r_vec.norm() > 0.0) dtheta = std::atan2(cross2(u_r_vec, u_safe), u_r_vec.dot(u_safe));
  const double scale = std::max(0.0, 1.0 - std::abs(dtheta) / cfg.theta_max);
  return {scale * u_safe.norm(), w_r + cfg.k_omega * dtheta};
}

FilterResult filter(const Twist& nmpc_cmd, const Pose2& pose, const ZbfModel& zbf, const CbfConfig& cfg) {
  const Vec2 u_r = nmpc_cmd.v * pose.heading();
  const CbfQpResult qp = solve_qp(u_r, pose.position(), zbf, cfg);
  FilterResult out;
  out.violation = !qp.feasible;
  if (qp.u == u_r) {
    out.cmd = nmpc_cmd;
    return out;
  }
  out.intervened = true;
  out.cmd = map_to_unicycle(qp.u, u_r, nmpc_cmd.w, cfg);
  return out;
}

}  // namespace gapnav
