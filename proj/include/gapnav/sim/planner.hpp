#pragma once

#include "gapnav/bezier.hpp"
#include "gapnav/cbf.hpp"
#include "gapnav/gaps.hpp"
#include "gapnav/nmpc.hpp"
#include "gapnav/zbf.hpp"

#include <optional>
#include <vector>

namespace gapnav::sim {

struct PlannerConfig {
  double robot_radius = 0.2;
  double v_d = 0.4;
  double horizon = 3.0;
  double switch_ratio = 0.8;
  ScoreWeights weights;
  ZbfOptions zbf;
  NmpcConfig nmpc;
  CbfConfig cbf;
  /// Distance between the robot and its reference that forces a replan.
  double replan_tracking_error = 0.5;
  /// Consecutive relaxed NMPC solves that force a replan.
  int replan_relaxed_count = 2;
  /// Replan once less than this much of the reference (seconds) is left.
  double replan_remaining_time = 1.0;
};

/// One candidate in the robot frame.
struct Candidate {
  InflatedKeyhole keyhole;
  JoinedBezierPath path;
  double score = 0.0;
  bool circle_only = false;
};

/// A committed plan, stored in the world frame.
struct ActivePlan {
  InflatedKeyhole keyhole;
  JoinedBezierPath path;
  ZbfModel zbf;
  ReferenceTrajectory ref;
  std::size_t ref_index = 0;
  int id = 0;
};

struct CycleTimings {
  double gap_ms = 0.0;
  double path_ms = 0.0;  // mean per synthesized candidate
  double zbf_ms = 0.0;
  double nmpc_ms = 0.0;
  double cycle_ms = 0.0;
  int n_paths = 0;
  bool zbf_trained = false;
};

struct CycleResult {
  bool has_plan = false;
  bool new_plan = false;
  bool kept_previous = false;
  Twist cmd;
  std::size_t n_gaps = 0;
  std::size_t n_candidates = 0;
  std::optional<NmpcStatus> nmpc_status;
  int nmpc_iterations = 0;
  CycleTimings timings;
};

/// Gap keyholes (plus the circle-only fallback) for one scan, in the robot frame.
std::vector<InflatedKeyhole> build_keyholes(const EgoCircle& scan, double robot_radius, std::size_t* n_gaps = nullptr);

/// Synthesizes and scores one path per keyhole toward `waypoint` (robot frame).
std::vector<Candidate> generate_candidates(const std::vector<InflatedKeyhole>& keyholes, const EgoCircle& scan,
                                           const Vec2& waypoint, double v0, const Vec2& a0, const PlannerConfig& cfg,
                                           double* path_ms = nullptr);

/// Gap -> keyhole -> path -> selection -> ZBF -> NMPC, with hysteresis over cycles.
class LocalPlanner {
 public:
  explicit LocalPlanner(PlannerConfig cfg) : cfg_(std::move(cfg)) {}

  /// `scan` is the robot-frame egocircle at `pose`; `a0` the robot-frame acceleration.
  CycleResult plan(const EgoCircle& scan, const Pose2& pose, const Twist& vel, const Vec2& a0,
                   const std::optional<Vec2>& waypoint);

  const std::optional<ActivePlan>& active() const { return active_; }
  const PlannerConfig& config() const { return cfg_; }

 private:
  PlannerConfig cfg_;
  std::optional<ActivePlan> active_;
  std::optional<NmpcSolution> last_solution_;
  int relaxed_streak_ = 0;
  bool force_replan_ = false;
  int next_id_ = 1;
};

}  // namespace gapnav::sim
