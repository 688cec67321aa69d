#pragma once

#include "gapnav/sim/global_planner.hpp"
#include "gapnav/sim/planner.hpp"
#include "gapnav/sim/robot.hpp"
#include "gapnav/sim/sensor.hpp"
#include "gapnav/sim/world.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gapnav::sim {

enum class Outcome { success, abort, collision };

std::string to_string(Outcome o);

struct EpisodeConfig {
  RobotModel robot;
  SensorConfig sensor;
  PlannerConfig planner;
  double dt_sim = 0.02;
  int plan_every = 5;  // physics steps per planning cycle
  double goal_tolerance = 0.3;
  double abort_patience = 5.0;
  double timeout = 120.0;
  /// Extra inflation of the global grid beyond the robot radius.
  double grid_margin = 0.1;
  bool record_trace = true;
};

/// Per-cycle wall-clock samples in milliseconds. Never written to the trace.
struct StageTimings {
  std::vector<double> gap, path, zbf, nmpc, qp, cycle;
};

struct RunResult {
  Outcome outcome = Outcome::abort;
  std::string reason;
  std::uint64_t seed = 0;
  std::vector<std::string> trace;  // JSON lines
  StageTimings timings;
  double sim_time = 0.0;
  double path_length = 0.0;
  /// Lowest h at the robot position under the active barrier; +inf when none was active.
  double min_h = 0.0;
  /// Largest observed ((1 - gamma dt) h_k - h_{k+1}) / dt^2 under an unchanged barrier.
  double kappa = 0.0;
  int filter_interventions = 0;
  int qp_infeasible = 0;
  /// Steps where the forward speed was cut so the next position stays in the safe set.
  int step_holds = 0;
  int planning_cycles = 0;
  int relaxed_cycles = 0;
  std::vector<int> nmpc_iterations;
};

RunResult run_episode(const World& w, const EpisodeConfig& cfg, std::uint64_t seed = 0);

void write_trace(const RunResult& r, std::ostream& os);

}  // namespace gapnav::sim
