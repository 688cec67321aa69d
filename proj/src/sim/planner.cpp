#include "gapnav/sim/planner.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace gapnav::sim {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<Vec2> obstacle_points(const EgoCircle& scan) {
  std::vector<Vec2> pts;
  pts.reserve(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i)
    if (!scan.is_max(i)) pts.push_back(beam_point(scan, i));
  return pts;
}

}  // namespace

std::vector<InflatedKeyhole> build_keyholes(const EgoCircle& scan, double robot_radius, std::size_t* n_gaps) {
  const double R = largest_centered_disc(scan).radius;
  const auto gaps = detect_gaps(scan, GapDetectionParams::for_robot(robot_radius, scan.angle_increment()));
  if (n_gaps) *n_gaps = gaps.size();
  std::vector<InflatedKeyhole> out;
  for (const auto& gap : gaps) {
    const double nearest = std::min(gap.left_point.norm(), gap.right_point.norm());
    // An endpoint on the free disc itself leaves no room for the sides.
    const double radius = nearest <= R * (1.0 + 1e-3) ? 0.9 * R : 0.0;
    try {
      const Keyhole k = construct_keyhole(gap, scan, robot_radius, 0.0, radius);
      out.push_back(inflate_keyhole(k, robot_radius, default_margin(k)));
    } catch (const GeometryError&) {
    }
  }
  try {
    const Keyhole c = circle_keyhole(scan);
    out.push_back(inflate_keyhole(c, robot_radius, default_margin(c)));
  } catch (const GeometryError&) {
  }
  return out;
}

std::vector<Candidate> generate_candidates(const std::vector<InflatedKeyhole>& keyholes, const EgoCircle& scan,
                                           const Vec2& waypoint, double v0, const Vec2& a0, const PlannerConfig& cfg,
                                           double* path_ms) {
  const auto obstacles = obstacle_points(scan);
  std::vector<Candidate> out;
  double total_ms = 0.0;
  int n = 0;
  for (const auto& k : keyholes) {
    const auto t0 = Clock::now();
    ++n;
    try {
      const Vec2 goal = clamp_into(k, waypoint);
      Candidate c;
      c.keyhole = k;
      c.circle_only = !k.has_polygon();
      c.path = synthesize(k, goal, Pose2(), v0, a0, cfg.v_d);
      c.score = score(c.path, obstacles, waypoint, 0.0, cfg.weights);
      out.push_back(std::move(c));
    } catch (const GeometryError&) {
    }
    total_ms += ms_since(t0);
  }
  if (path_ms) *path_ms = n ? total_ms / n : 0.0;
  return out;
}

CycleResult LocalPlanner::plan(const EgoCircle& scan, const Pose2& pose, const Twist& vel, const Vec2& a0,
                               const std::optional<Vec2>& waypoint) {
  const auto t_cycle = Clock::now();
  CycleResult res;

  auto t0 = Clock::now();
  const auto keyholes = build_keyholes(scan, cfg_.robot_radius, &res.n_gaps);
  res.timings.gap_ms = ms_since(t0);

  std::vector<Candidate> cands;
  if (waypoint) {
    cands = generate_candidates(keyholes, scan, pose.to_local(*waypoint), vel.v, a0, cfg_, &res.timings.path_ms);
    res.timings.n_paths = int(keyholes.size());
  }
  res.n_candidates = cands.size();

  if (active_) {
    ActivePlan& a = *active_;
    std::size_t best = a.ref_index;
    double best_d = (a.ref.poses[best].position() - pose.position()).squaredNorm();
    for (std::size_t k = a.ref_index + 1; k < std::min(a.ref.size(), a.ref_index + 10); ++k) {
      const double d = (a.ref.poses[k].position() - pose.position()).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    a.ref_index = best;
    if (std::sqrt(best_d) > cfg_.replan_tracking_error) force_replan_ = true;
    // A nearly consumed reference has nothing left to defend.
    if (double(a.ref.size() - 1 - a.ref_index) * a.ref.dt < cfg_.replan_remaining_time) force_replan_ = true;
  }

  std::optional<double> prev_score;
  if (active_ && !force_replan_ && waypoint) {
    auto pts = obstacle_points(scan);
    for (auto& p : pts) p = pose.to_world(p);
    prev_score = score(active_->path, pts, *waypoint, pose.theta, cfg_.weights);
  }
  std::vector<double> scores;
  for (const auto& c : cands) scores.push_back(c.score);
  const auto sel = select(scores, prev_score, cfg_.switch_ratio);

  if (sel && !sel->keep_previous) {
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    for (std::size_t idx : order) {
      if (!std::isfinite(scores[idx])) break;
      try {
        ActivePlan p;
        p.keyhole = transformed(cands[idx].keyhole, pose);
        t0 = Clock::now();
        p.zbf = fit_zbf(p.keyhole, cfg_.zbf);
        res.timings.zbf_ms = ms_since(t0);
        res.timings.zbf_trained = true;
        p.path = cands[idx].path.transformed(pose);
        p.ref = time_parameterize(p.path, cfg_.v_d, cfg_.nmpc.dt);
        p.id = next_id_++;
        active_ = std::move(p);
        last_solution_.reset();
        relaxed_streak_ = 0;
        force_replan_ = false;
        res.new_plan = true;
        break;
      } catch (const ZbfError&) {
      } catch (const GeometryError&) {
      }
    }
  }
  res.kept_previous = active_ && !res.new_plan;
  // Without a selection the old plan is still tracked, but it counts toward abort.
  res.has_plan = res.new_plan || (sel.has_value() && active_.has_value());

  if (active_) {
    ActivePlan& a = *active_;
    t0 = Clock::now();
    const auto window = a.ref.window(a.ref_index, std::size_t(cfg_.nmpc.N));
    NmpcSolution sol = solve(pose, vel, window, &a.zbf, cfg_.nmpc, last_solution_ ? &*last_solution_ : nullptr);
    res.timings.nmpc_ms = ms_since(t0);
    res.nmpc_status = sol.status;
    res.nmpc_iterations = sol.iterations;
    relaxed_streak_ = sol.status == NmpcStatus::infeasible_relaxed ? relaxed_streak_ + 1 : 0;
    if (relaxed_streak_ >= cfg_.replan_relaxed_count) force_replan_ = true;
    res.cmd = sol.controls.front();
    last_solution_ = std::move(sol);
  }
  res.timings.cycle_ms = ms_since(t_cycle);
  return res;
}

}  // namespace gapnav::sim
