#pragma once

#include "gapnav/sim/episode.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gapnav {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CampaignConfig {
  sim::WorldKind kind = sim::WorldKind::dense;
  double density = 0.12;
  std::optional<std::string> world_file;  // overrides generation when set
  int n_runs = 50;
  std::uint64_t seed_base = 0;
  sim::EpisodeConfig episode;
  std::string out_dir;  // empty: nothing written
  bool svg = false;
  bool traces = false;
  int threads = 1;
  std::optional<Pose2> pose;  // zbf-demo only
};

/// Reads a JSON config. Unknown keys and wrong types are errors.
CampaignConfig campaign_from_json(const nlohmann::json& j);
CampaignConfig load_config(const std::string& path);

/// The world for one seed: the world file if configured, otherwise generated.
sim::World make_world(const CampaignConfig& cfg, std::uint64_t seed);

struct RunRow {
  std::uint64_t seed = 0;
  sim::Outcome outcome = sim::Outcome::abort;
  double sim_time = 0.0;
  double path_length = 0.0;
  double min_h = 0.0;
  double t_gap = 0.0, t_path = 0.0, t_zbf = 0.0, t_nmpc = 0.0, t_qp = 0.0;
  double t_cycle = 0.0;
};

RunRow summarize(const sim::RunResult& r);

extern const char* const kCsvHeader;
std::string csv_row(const RunRow& r);

struct TimingStats {
  std::size_t count = 0;
  double mean = 0.0, p50 = 0.0, p95 = 0.0, max = 0.0;
};

TimingStats timing_stats(std::vector<double> samples);

struct CampaignSummary {
  int n_runs = 0;
  int successes = 0, aborts = 0, collisions = 0;
  double success_rate = 0.0, abort_rate = 0.0, collision_rate = 0.0;
  std::map<std::string, TimingStats> timings;  // gap, path, zbf, nmpc, qp, cycle
  std::vector<RunRow> rows;
  double max_kappa = 0.0;
  double min_h = 0.0;
  double wall_seconds = 0.0;
};

nlohmann::json to_json(const CampaignSummary& s);

/// Runs seeds seed_base .. seed_base + n_runs - 1. With an output directory it
/// writes runs.csv and summary.json, plus per-run traces / SVGs when asked.
CampaignSummary run_campaign(const CampaignConfig& cfg);

/// Zero level set of the barrier over a box, as line segments (marching squares).
std::vector<std::pair<Vec2, Vec2>> zero_contour(const ZbfModel& m, const Vec2& lo, const Vec2& hi, double cell);

/// SVG of a JSONL trace: world, driven path, last keyhole and its barrier contour.
std::string render_trace(const std::vector<std::string>& lines);
std::string render_trace_file(const std::string& path);

struct ZbfDemo {
  InflatedKeyhole keyhole;
  ZbfModel zbf;
  std::vector<std::pair<Vec2, Vec2>> contour;
  std::string svg;
};

/// Scans the world from `pose`, picks the best-scoring keyhole toward the goal and fits its barrier.
ZbfDemo zbf_demo(const sim::World& w, const Pose2& pose, const sim::EpisodeConfig& cfg);

}  // namespace gapnav
