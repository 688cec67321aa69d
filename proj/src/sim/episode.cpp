#include "gapnav/sim/episode.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace gapnav::sim {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::abort: return "abort";
    case Outcome::collision: return "collision";
  }
  return "unknown";
}

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

json pose_json(const Pose2& p) { return {p.x1, p.x2, p.theta}; }
json vec_json(const Vec2& v) { return {v.x(), v.y()}; }

json keyhole_json(const InflatedKeyhole& k) {
  json verts = json::array();
  for (const auto& v : k.polygon.vertices()) verts.push_back(vec_json(v));
  return {{"center", vec_json(k.circle.center)}, {"radius", k.circle.radius}, {"polygon", verts},
          {"inflation", k.inflation}};
}

json path_json(const JoinedBezierPath& p) {
  json cubic = json::array();
  for (const auto& c : p.first.p) cubic.push_back(vec_json(c));
  json out = {{"cubic", cubic}, {"tf1", p.first.tf}};
  if (p.second) {
    json quad = json::array();
    for (const auto& q : p.second->q) quad.push_back(vec_json(q));
    out["quad"] = quad;
    out["tf2"] = p.second->tf;
  }
  return out;
}

}  // namespace

RunResult run_episode(const World& w, const EpisodeConfig& cfg, std::uint64_t seed) {
  RunResult r;
  r.seed = seed;
  r.min_h = std::numeric_limits<double>::infinity();
  auto emit = [&](const json& j) {
    if (cfg.record_trace) r.trace.push_back(j.dump());
  };
  emit({{"type", "header"}, {"seed", seed}, {"world", to_json(w)}, {"dt", cfg.dt_sim},
        {"robot_radius", cfg.robot.radius}, {"fov", cfg.sensor.fov}});

  const GlobalPlanner global(w, cfg.robot.radius + cfg.grid_margin);
  LocalPlanner planner(cfg.planner);
  ScanMemory memory;
  RobotState state{w.start, {0.0, 0.0}};
  Twist prev_vel{0.0, 0.0};
  Twist cmd_nmpc{0.0, 0.0};
  double no_plan_time = 0.0;
  const double plan_period = cfg.plan_every * cfg.dt_sim;
  int last_plan_id = 0;
  double last_h = 0.0;
  bool have_last_h = false;

  auto finish = [&](Outcome o, const std::string& reason, double t) {
    r.outcome = o;
    r.reason = reason;
    r.sim_time = t;
    emit({{"type", "outcome"}, {"outcome", to_string(o)}, {"reason", reason}, {"t", t},
          {"path_length", r.path_length}, {"min_h", std::isfinite(r.min_h) ? json(r.min_h) : json(nullptr)}});
  };

  if (check_collision(w, state.pose.position(), cfg.robot.radius)) {
    finish(Outcome::collision, "start in collision", 0.0);
    return r;
  }

  for (long step = 0;; ++step) {
    const double t = step * cfg.dt_sim;
    const Vec2 pos = state.pose.position();
    if ((pos - w.goal).norm() <= cfg.goal_tolerance) {
      finish(Outcome::success, "goal reached", t);
      return r;
    }
    if (t >= cfg.timeout) {
      finish(Outcome::abort, "timeout", t);
      return r;
    }

    if (step % cfg.plan_every == 0) {
      const Pose2 sensor_pose = state.pose.to_world(cfg.sensor.mount_offset);
      const EgoCircle raw = raycast_scan(w, state.pose, cfg.sensor);
      memory.observe(raw, sensor_pose, cfg.sensor);
      const EgoCircle scan = memory.fill(raw, sensor_pose, cfg.sensor);
      const auto wp = global.waypoint(pos, cfg.planner.horizon);
      if (!wp) {
        finish(Outcome::abort, "no global path", t);
        return r;
      }
      const Vec2 a0((state.vel.v - prev_vel.v) / cfg.dt_sim, state.vel.v * state.vel.w);
      const CycleResult cr = planner.plan(scan, state.pose, state.vel, a0, wp);
      ++r.planning_cycles;
      r.timings.gap.push_back(cr.timings.gap_ms);
      if (cr.timings.n_paths > 0) r.timings.path.push_back(cr.timings.path_ms);
      if (cr.timings.zbf_trained) r.timings.zbf.push_back(cr.timings.zbf_ms);
      if (cr.nmpc_status) {
        r.timings.nmpc.push_back(cr.timings.nmpc_ms);
        r.nmpc_iterations.push_back(cr.nmpc_iterations);
        if (*cr.nmpc_status == NmpcStatus::infeasible_relaxed) ++r.relaxed_cycles;
      }
      r.timings.cycle.push_back(cr.timings.cycle_ms);
      cmd_nmpc = cr.cmd;
      no_plan_time = cr.has_plan ? 0.0 : no_plan_time + plan_period;

      json pj = {{"type", "plan"}, {"k", step}, {"t", t}, {"waypoint", vec_json(*wp)}, {"has_plan", cr.has_plan},
                 {"new_plan", cr.new_plan}, {"kept_previous", cr.kept_previous}, {"n_gaps", cr.n_gaps},
                 {"n_candidates", cr.n_candidates},
                 {"nmpc_status", cr.nmpc_status ? to_string(*cr.nmpc_status) : std::string("none")},
                 {"nmpc_iterations", cr.nmpc_iterations}, {"cmd", {cr.cmd.v, cr.cmd.w}}};
      if (cr.new_plan) {
        const ActivePlan& a = *planner.active();
        pj["plan_id"] = a.id;
        pj["zbf"] = to_json(a.zbf);
        pj["keyhole"] = keyhole_json(a.keyhole);
        pj["path"] = path_json(a.path);
      }
      emit(pj);
      if (no_plan_time >= cfg.abort_patience - 1e-9) {
        finish(Outcome::abort, "no plan", t);
        return r;
      }
    }

    Twist cmd = cmd_nmpc;
    json h_json = nullptr;
    bool filtered = false, violation = false;
    const auto& active = planner.active();
    if (active) {
      const double h = eval(active->zbf, pos);
      if (have_last_h && active->id == last_plan_id) {
        const double gdt = cfg.planner.cbf.gamma * cfg.dt_sim;
        r.kappa = std::max(r.kappa, ((1.0 - gdt) * last_h - h) / (cfg.dt_sim * cfg.dt_sim));
      }
      last_h = h;
      have_last_h = true;
      last_plan_id = active->id;
      r.min_h = std::min(r.min_h, h);
      h_json = h;
      const auto t0 = Clock::now();
      FilterResult f = filter(cmd_nmpc, state.pose, active->zbf, cfg.planner.cbf);
      r.timings.qp.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
      cmd = f.cmd;
      // The QP only bounds dh/dt. One physics step can still cross a thin set (the
      // gradient vanishes at the disc center), so back the forward speed off until the
      // stepped position stays inside.
      if (h >= 0.0 && cmd.v > 0.0) {
        auto h_after = [&](double v) {
          return eval(active->zbf, step_robot(state, {v, cmd.w}, cfg.dt_sim, cfg.robot).pose.position());
        };
        if (h_after(cmd.v) < 0.0) {
          double lo = 0.0, hi = cmd.v;
          for (int i = 0; i < 30; ++i) {
            const double mid = 0.5 * (lo + hi);
            (h_after(mid) >= 0.0 ? lo : hi) = mid;
          }
          cmd.v = lo;
          ++r.step_holds;
          f.intervened = true;
        }
      }
      filtered = f.intervened;
      violation = f.violation;
      r.filter_interventions += f.intervened;
      r.qp_infeasible += f.violation;
    }
    emit({{"type", "step"}, {"k", step}, {"t", t}, {"pose", pose_json(state.pose)},
          {"vel", {state.vel.v, state.vel.w}}, {"cmd", {cmd.v, cmd.w}}, {"h", h_json},
          {"plan_id", active ? active->id : 0}, {"filtered", filtered}, {"violation", violation}});

    prev_vel = state.vel;
    const RobotState next = step_robot(state, cmd, cfg.dt_sim, cfg.robot);
    r.path_length += (next.pose.position() - pos).norm();
    state = next;
    if (check_collision(w, state.pose.position(), cfg.robot.radius)) {
      finish(Outcome::collision, "contact", t + cfg.dt_sim);
      return r;
    }
  }
}

void write_trace(const RunResult& r, std::ostream& os) {
  for (const auto& line : r.trace) os << line << '\n';
}

}  // namespace gapnav::sim
