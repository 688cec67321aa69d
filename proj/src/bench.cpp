#include "gapnav/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace gapnav {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Checks keys against a whitelist so typos surface as config errors.
void expect_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_twist(const json& j, const char* key, Twist& out) {
  if (!j.contains(key)) return;
  std::array<double, 2> a{};
  read(j, key, a);
  out = {a[0], a[1]};
}

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

void parse_robot(const json& j, sim::RobotModel& m) {
  expect_keys(j, "robot", {"order", "radius", "v_lb", "v_ub", "a_bounds"});
  if (j.contains("order")) {
    std::string s;
    read(j, "order", s);
    try {
      m.order = sim::parse_robot_order(s);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  read(j, "radius", m.radius);
  read_twist(j, "v_lb", m.v_lb);
  read_twist(j, "v_ub", m.v_ub);
  read_twist(j, "a_bounds", m.a_bounds);
  if (!(m.radius > 0.0)) throw ConfigError("robot.radius must be positive");
  if (m.v_lb.v > m.v_ub.v || m.v_lb.w > m.v_ub.w) throw ConfigError("robot velocity bounds out of order");
}

void parse_sensor(const json& j, sim::SensorConfig& s) {
  expect_keys(j, "sensor", {"n_beams", "fov_deg", "max_range"});
  read(j, "n_beams", s.n_beams);
  if (j.contains("fov_deg")) {
    double d = 360.0;
    read(j, "fov_deg", d);
    s.fov = deg2rad(d);
  }
  read(j, "max_range", s.max_range);
  if (s.n_beams < 8) throw ConfigError("sensor.n_beams must be at least 8");
  if (!(s.fov > 0.0 && s.fov <= 2.0 * std::numbers::pi + 1e-12)) throw ConfigError("sensor.fov_deg out of (0, 360]");
  if (!(s.max_range > 0.0)) throw ConfigError("sensor.max_range must be positive");
}

void parse_planner(const json& j, sim::PlannerConfig& p) {
  expect_keys(j, "planner", {"v_d", "horizon", "switch_ratio", "weights", "zbf", "nmpc", "cbf",
                             "replan_tracking_error", "replan_relaxed_count", "replan_remaining_time"});
  read(j, "v_d", p.v_d);
  read(j, "horizon", p.horizon);
  read(j, "switch_ratio", p.switch_ratio);
  read(j, "replan_tracking_error", p.replan_tracking_error);
  read(j, "replan_relaxed_count", p.replan_relaxed_count);
  read(j, "replan_remaining_time", p.replan_remaining_time);
  if (j.contains("weights")) {
    const json& w = j["weights"];
    expect_keys(w, "planner.weights", {"w1", "w_theta", "w_decay", "c_obs", "r_ins", "r_max"});
    read(w, "w1", p.weights.w1);
    read(w, "w_theta", p.weights.w_theta);
    read(w, "w_decay", p.weights.w_decay);
    read(w, "c_obs", p.weights.c_obs);
    read(w, "r_ins", p.weights.r_ins);
    read(w, "r_max", p.weights.r_max);
  }
  if (j.contains("zbf")) {
    const json& z = j["zbf"];
    expect_keys(z, "planner.zbf", {"epsilon_fraction", "spacing", "margin", "slack_weight"});
    read(z, "epsilon_fraction", p.zbf.epsilon_fraction);
    read(z, "spacing", p.zbf.spacing);
    read(z, "margin", p.zbf.margin);
    read(z, "slack_weight", p.zbf.slack_weight);
  }
  if (j.contains("nmpc")) {
    const json& n = j["nmpc"];
    expect_keys(n, "planner.nmpc", {"N", "dt", "Q", "R", "u_lb", "u_ub", "a_ub", "max_iters", "tol", "slack_penalty",
                                    "trust_radius"});
    read(n, "N", p.nmpc.N);
    read(n, "dt", p.nmpc.dt);
    if (n.contains("Q")) {
      std::array<double, 3> q{};
      read(n, "Q", q);
      p.nmpc.Q = {q[0], q[1], q[2]};
    }
    if (n.contains("R")) {
      std::array<double, 2> r{};
      read(n, "R", r);
      p.nmpc.R = {r[0], r[1]};
    }
    read_twist(n, "u_lb", p.nmpc.u_lb);
    read_twist(n, "u_ub", p.nmpc.u_ub);
    read_twist(n, "a_ub", p.nmpc.a_ub);
    read(n, "max_iters", p.nmpc.max_iters);
    read(n, "tol", p.nmpc.tol);
    read(n, "slack_penalty", p.nmpc.slack_penalty);
    read(n, "trust_radius", p.nmpc.trust_radius);
    if (p.nmpc.N < 1) throw ConfigError("planner.nmpc.N must be at least 1");
  }
  if (j.contains("cbf")) {
    const json& c = j["cbf"];
    expect_keys(c, "planner.cbf", {"gamma", "k_omega", "theta_max_deg", "v_bound"});
    read(c, "gamma", p.cbf.gamma);
    read(c, "k_omega", p.cbf.k_omega);
    if (c.contains("theta_max_deg")) {
      double d = 60.0;
      read(c, "theta_max_deg", d);
      p.cbf.theta_max = deg2rad(d);
    }
    read(c, "v_bound", p.cbf.v_bound);
  }
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot open " + p.string() + " for writing");
  os << content;
  if (!os) throw IoError("write failed: " + p.string());
}

}  // namespace

CampaignConfig campaign_from_json(const json& j) {
  expect_keys(j, "config", {"scenario", "density", "world_file", "n_runs", "seed_base", "robot", "sensor", "planner",
                            "episode", "out_dir", "svg", "traces", "threads", "pose"});
  CampaignConfig c;
  if (j.contains("scenario")) {
    std::string s;
    read(j, "scenario", s);
    try {
      c.kind = sim::parse_world_kind(s);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  read(j, "density", c.density);
  if (j.contains("world_file")) {
    std::string f;
    read(j, "world_file", f);
    c.world_file = f;
  }
  read(j, "n_runs", c.n_runs);
  read(j, "seed_base", c.seed_base);
  read(j, "out_dir", c.out_dir);
  read(j, "svg", c.svg);
  read(j, "traces", c.traces);
  read(j, "threads", c.threads);
  if (j.contains("robot")) parse_robot(j["robot"], c.episode.robot);
  if (j.contains("sensor")) parse_sensor(j["sensor"], c.episode.sensor);
  if (j.contains("planner")) parse_planner(j["planner"], c.episode.planner);
  if (j.contains("episode")) {
    const json& e = j["episode"];
    expect_keys(e, "episode", {"dt_sim", "plan_every", "goal_tolerance", "abort_patience", "timeout", "grid_margin"});
    read(e, "dt_sim", c.episode.dt_sim);
    read(e, "plan_every", c.episode.plan_every);
    read(e, "goal_tolerance", c.episode.goal_tolerance);
    read(e, "abort_patience", c.episode.abort_patience);
    read(e, "timeout", c.episode.timeout);
    read(e, "grid_margin", c.episode.grid_margin);
    if (!(c.episode.dt_sim > 0.0) || c.episode.plan_every < 1) throw ConfigError("episode rates must be positive");
  }
  if (j.contains("pose")) {
    std::array<double, 3> p{};
    read(j, "pose", p);
    c.pose = Pose2(p[0], p[1], p[2]);
  }
  // Keep the planner consistent with the robot it drives.
  c.episode.planner.robot_radius = c.episode.robot.radius;
  if (c.n_runs < 1) throw ConfigError("n_runs must be at least 1");
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  if (c.density < 0.0) throw ConfigError("density must be non-negative");
  return c;
}

CampaignConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  CampaignConfig c = campaign_from_json(j);
  // Relative world files resolve against the config's directory.
  if (c.world_file && fs::path(*c.world_file).is_relative())
    c.world_file = (fs::path(path).parent_path() / *c.world_file).string();
  return c;
}

sim::World make_world(const CampaignConfig& cfg, std::uint64_t seed) {
  if (cfg.world_file) {
    std::ifstream is(*cfg.world_file);
    if (!is) throw IoError("cannot read world " + *cfg.world_file);
    try {
      return sim::world_from_json(json::parse(is));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("world file: ") + e.what());
    } catch (const sim::WorldError& e) {
      throw ConfigError(std::string("world file: ") + e.what());
    }
  }
  try {
    return sim::generate_world(cfg.kind, seed, cfg.density);
  } catch (const sim::WorldError& e) {
    throw ConfigError(e.what());
  }
}

RunRow summarize(const sim::RunResult& r) {
  RunRow row;
  row.seed = r.seed;
  row.outcome = r.outcome;
  row.sim_time = r.sim_time;
  row.path_length = r.path_length;
  row.min_h = r.min_h;
  row.t_gap = mean(r.timings.gap);
  row.t_path = mean(r.timings.path);
  row.t_zbf = mean(r.timings.zbf);
  row.t_nmpc = mean(r.timings.nmpc);
  row.t_qp = mean(r.timings.qp);
  row.t_cycle = mean(r.timings.cycle);
  return row;
}

const char* const kCsvHeader = "seed,outcome,sim_time_s,path_length_m,min_h,t_gap_ms,t_path_ms,t_zbf_ms,t_nmpc_ms,t_qp_ms";

std::string csv_row(const RunRow& r) {
  std::ostringstream os;
  os << r.seed << ',' << sim::to_string(r.outcome) << ',' << fmt(r.sim_time) << ',' << fmt(r.path_length) << ','
     << fmt(r.min_h) << ',' << fmt(r.t_gap) << ',' << fmt(r.t_path) << ',' << fmt(r.t_zbf) << ',' << fmt(r.t_nmpc)
     << ',' << fmt(r.t_qp);
  return os.str();
}

TimingStats timing_stats(std::vector<double> s) {
  TimingStats t;
  t.count = s.size();
  if (s.empty()) return t;
  std::sort(s.begin(), s.end());
  t.mean = mean(s);
  auto pct = [&](double q) { return s[std::min(s.size() - 1, std::size_t(q * double(s.size() - 1) + 0.5))]; };
  t.p50 = pct(0.5);
  t.p95 = pct(0.95);
  t.max = s.back();
  return t;
}

json to_json(const CampaignSummary& s) {
  json timings = json::object();
  for (const auto& [k, t] : s.timings)
    timings[k] = {{"count", t.count}, {"mean_ms", t.mean}, {"p50_ms", t.p50}, {"p95_ms", t.p95}, {"max_ms", t.max}};
  return {{"n_runs", s.n_runs},
          {"success", s.successes},
          {"abort", s.aborts},
          {"collision", s.collisions},
          {"success_rate", s.success_rate},
          {"abort_rate", s.abort_rate},
          {"collision_rate", s.collision_rate},
          {"min_h", std::isfinite(s.min_h) ? json(s.min_h) : json(nullptr)},
          {"max_kappa", s.max_kappa},
          {"wall_seconds", s.wall_seconds},
          {"timings", timings},
          {"note", "timings are wall-clock on the machine that ran the campaign and are not comparable across hardware"}};
}

CampaignSummary run_campaign(const CampaignConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  fs::path out;
  if (!cfg.out_dir.empty()) {
    out = cfg.out_dir;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory " + out.string());
  }

  // Worlds are built up front so configuration errors surface before any run.
  std::vector<sim::World> worlds;
  for (int i = 0; i < cfg.n_runs; ++i) worlds.push_back(make_world(cfg, cfg.seed_base + std::uint64_t(i)));

  std::vector<sim::RunResult> results(cfg.n_runs);
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (int i; (i = next++) < cfg.n_runs;) {
      try {
        sim::EpisodeConfig ec = cfg.episode;
        ec.record_trace = cfg.traces || cfg.svg;
        results[i] = sim::run_episode(worlds[i], ec, cfg.seed_base + std::uint64_t(i));
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const int nt = std::min(cfg.threads, cfg.n_runs);
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);

  CampaignSummary s;
  s.n_runs = cfg.n_runs;
  s.min_h = std::numeric_limits<double>::infinity();
  std::map<std::string, std::vector<double>> samples;
  for (const auto& r : results) {
    s.rows.push_back(summarize(r));
    switch (r.outcome) {
      case sim::Outcome::success: ++s.successes; break;
      case sim::Outcome::abort: ++s.aborts; break;
      case sim::Outcome::collision: ++s.collisions; break;
    }
    s.min_h = std::min(s.min_h, r.min_h);
    s.max_kappa = std::max(s.max_kappa, r.kappa);
    auto add = [&](const char* k, const std::vector<double>& v) {
      samples[k].insert(samples[k].end(), v.begin(), v.end());
    };
    add("gap", r.timings.gap);
    add("path", r.timings.path);
    add("zbf", r.timings.zbf);
    add("nmpc", r.timings.nmpc);
    add("qp", r.timings.qp);
    add("cycle", r.timings.cycle);
  }
  s.success_rate = double(s.successes) / s.n_runs;
  s.abort_rate = double(s.aborts) / s.n_runs;
  s.collision_rate = double(s.collisions) / s.n_runs;
  for (auto& [k, v] : samples) s.timings[k] = timing_stats(std::move(v));
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  if (!out.empty()) {
    std::string csv = std::string(kCsvHeader) + "\n";
    for (const auto& row : s.rows) csv += csv_row(row) + "\n";
    write_file(out / "runs.csv", csv);
    write_file(out / "summary.json", to_json(s).dump(2) + "\n");
    for (const auto& r : results) {
      const std::string stem = "seed_" + std::to_string(r.seed);
      if (cfg.traces) {
        std::ostringstream os;
        sim::write_trace(r, os);
        write_file(out / (stem + ".jsonl"), os.str());
      }
      if (cfg.svg) write_file(out / (stem + ".svg"), render_trace(r.trace));
    }
  }
  return s;
}

// ---- rendering ----

std::vector<std::pair<Vec2, Vec2>> zero_contour(const ZbfModel& m, const Vec2& lo, const Vec2& hi, double cell) {
  if (!(cell > 0.0)) throw std::invalid_argument("zero_contour: cell must be positive");
  const int nx = std::max(1, int(std::ceil((hi.x() - lo.x()) / cell)));
  const int ny = std::max(1, int(std::ceil((hi.y() - lo.y()) / cell)));
  auto node = [&](int i, int j) { return Vec2(lo.x() + i * cell, lo.y() + j * cell); };
  std::vector<double> v((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) v[j * (nx + 1) + i] = eval(m, node(i, j));
  auto val = [&](int i, int j) { return v[j * (nx + 1) + i]; };
  auto cross = [&](int i0, int j0, int i1, int j1) {
    const double a = val(i0, j0), b = val(i1, j1);
    const double t = a == b ? 0.5 : a / (a - b);
    return Vec2(node(i0, j0) + t * (node(i1, j1) - node(i0, j0)));
  };

  std::vector<std::pair<Vec2, Vec2>> segs;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      // Corners: 0 (i,j), 1 (i+1,j), 2 (i+1,j+1), 3 (i,j+1).
      const int c = (val(i, j) > 0) | (val(i + 1, j) > 0) << 1 | (val(i + 1, j + 1) > 0) << 2 | (val(i, j + 1) > 0) << 3;
      if (c == 0 || c == 15) continue;
      const Vec2 eb = cross(i, j, i + 1, j), er = cross(i + 1, j, i + 1, j + 1);
      const Vec2 et = cross(i, j + 1, i + 1, j + 1), el = cross(i, j, i, j + 1);
      switch (c) {
        case 1: case 14: segs.push_back({el, eb}); break;
        case 2: case 13: segs.push_back({eb, er}); break;
        case 3: case 12: segs.push_back({el, er}); break;
        case 4: case 11: segs.push_back({er, et}); break;
        case 6: case 9: segs.push_back({eb, et}); break;
        case 7: case 8: segs.push_back({el, et}); break;
        case 5: case 10: {
          // Saddle: the cell center decides which corners connect.
          const bool center_in = eval(m, node(i, j) + Vec2(0.5 * cell, 0.5 * cell)) > 0;
          if ((c == 5) == center_in) {
            segs.push_back({el, et});
            segs.push_back({eb, er});
          } else {
            segs.push_back({el, eb});
            segs.push_back({er, et});
          }
          break;
        }
      }
    }
  return segs;
}

namespace {

struct Svg {
  Vec2 lo, hi;
  double scale = 50.0;
  std::ostringstream body;

  double X(double x) const { return (x - lo.x()) * scale; }
  double Y(double y) const { return (hi.y() - y) * scale; }
  std::string pt(const Vec2& p) const { return fmt(X(p.x())) + "," + fmt(Y(p.y())); }

  void polyline(const std::vector<Vec2>& pts, const std::string& style, bool closed = false) {
    if (pts.empty()) return;
    body << (closed ? "<polygon" : "<polyline") << " points=\"";
    for (const auto& p : pts) body << pt(p) << ' ';
    body << "\" style=\"" << style << "\"/>\n";
  }
  void circle(const Vec2& c, double r, const std::string& style) {
    body << "<circle cx=\"" << fmt(X(c.x())) << "\" cy=\"" << fmt(Y(c.y())) << "\" r=\"" << fmt(r * scale)
         << "\" style=\"" << style << "\"/>\n";
  }
  void segment(const Vec2& a, const Vec2& b, const std::string& style) {
    body << "<line x1=\"" << fmt(X(a.x())) << "\" y1=\"" << fmt(Y(a.y())) << "\" x2=\"" << fmt(X(b.x())) << "\" y2=\""
         << fmt(Y(b.y())) << "\" style=\"" << style << "\"/>\n";
  }
  std::string str() const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt((hi.x() - lo.x()) * scale) << "\" height=\""
       << fmt((hi.y() - lo.y()) * scale) << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << body.str() << "</svg>\n";
    return os.str();
  }
};

void draw_world(Svg& svg, const sim::World& w) {
  svg.polyline({w.bounds.lo, {w.bounds.hi.x(), w.bounds.lo.y()}, w.bounds.hi, {w.bounds.lo.x(), w.bounds.hi.y()}},
               "fill:none;stroke:black;stroke-width:2", true);
  for (const auto& d : w.discs) svg.circle(d.center, d.radius, "fill:#555;stroke:none");
  for (const auto& p : w.polygons) svg.polyline(p.vertices(), "fill:#555;stroke:none", true);
  svg.circle(w.start.position(), 0.15, "fill:none;stroke:green;stroke-width:2");
  svg.circle(w.goal, 0.3, "fill:none;stroke:red;stroke-width:2");
}

Vec2 vec_of(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

void draw_keyhole_and_zbf(Svg& svg, const json& keyhole, const ZbfModel& zbf) {
  const Vec2 c = vec_of(keyhole.at("center"));
  const double r = keyhole.at("radius").get<double>();
  svg.circle(c, r, "fill:none;stroke:#36c;stroke-width:1;stroke-dasharray:4,3");
  std::vector<Vec2> poly;
  for (const auto& v : keyhole.at("polygon")) poly.push_back(vec_of(v));
  svg.polyline(poly, "fill:none;stroke:#36c;stroke-width:1;stroke-dasharray:4,3", true);
  Vec2 lo = c - Vec2(r, r), hi = c + Vec2(r, r);
  for (const auto& p : poly) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double pad = 0.1 * r + 0.05;
  for (const auto& [a, b] : zero_contour(zbf, lo - Vec2(pad, pad), hi + Vec2(pad, pad), std::max(0.01, r / 60.0)))
    svg.segment(a, b, "stroke:#c0c;stroke-width:2");
}

}  // namespace

std::string render_trace(const std::vector<std::string>& lines) {
  std::optional<sim::World> world;
  std::vector<Vec2> path;
  std::optional<json> last_plan;
  try {
    for (const auto& line : lines) {
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        world = sim::world_from_json(j.at("world"));
      } else if (type == "step") {
        path.push_back(vec_of(j.at("pose")));
      } else if (type == "plan" && j.contains("zbf")) {
        last_plan = j;
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed trace: ") + e.what());
  } catch (const sim::WorldError& e) {
    throw ConfigError(std::string("malformed trace: ") + e.what());
  }

  Svg svg;
  if (world) {
    svg.lo = world->bounds.lo;
    svg.hi = world->bounds.hi;
  } else {
    svg.lo = {-1, -1};
    svg.hi = {1, 1};
  }
  if (world) draw_world(svg, *world);
  if (last_plan) {
    try {
      draw_keyhole_and_zbf(svg, last_plan->at("keyhole"), zbf_from_json(last_plan->at("zbf")));
      std::vector<Vec2> planned;
      for (const auto& p : last_plan->at("path").at("cubic")) planned.push_back(vec_of(p));
      if (last_plan->at("path").contains("quad"))
        for (const auto& p : last_plan->at("path").at("quad")) planned.push_back(vec_of(p));
      svg.polyline(planned, "fill:none;stroke:#fa0;stroke-width:1");
    } catch (const std::exception& e) {
      throw ConfigError(std::string("malformed trace plan: ") + e.what());
    }
  }
  svg.polyline(path, "fill:none;stroke:#093;stroke-width:2");
  return svg.str();
}

std::string render_trace_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read trace " + path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(is, l);) lines.push_back(l);
  return render_trace(lines);
}

ZbfDemo zbf_demo(const sim::World& w, const Pose2& pose, const sim::EpisodeConfig& cfg) {
  const EgoCircle scan = sim::raycast_scan(w, pose, cfg.sensor);
  const auto keyholes = sim::build_keyholes(scan, cfg.planner.robot_radius);
  const sim::GlobalPlanner global(w, cfg.robot.radius + cfg.grid_margin);
  const auto wp = global.waypoint(pose.position(), cfg.planner.horizon);
  const Vec2 target = pose.to_local(wp ? *wp : w.goal);
  auto cands = sim::generate_candidates(keyholes, scan, target, 0.0, Vec2::Zero(), cfg.planner);
  std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
  for (const auto& c : cands) {
    try {
      ZbfDemo d;
      d.keyhole = transformed(c.keyhole, pose);
      d.zbf = fit_zbf(d.keyhole, cfg.planner.zbf);
      const double r = d.keyhole.circle.radius;
      Vec2 lo = d.keyhole.circle.center - Vec2(r, r), hi = d.keyhole.circle.center + Vec2(r, r);
      for (const auto& p : d.keyhole.polygon.vertices()) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
      d.contour = zero_contour(d.zbf, lo - Vec2(0.2, 0.2), hi + Vec2(0.2, 0.2), std::max(0.01, r / 60.0));
      Svg svg;
      svg.lo = w.bounds.lo;
      svg.hi = w.bounds.hi;
      draw_world(svg, w);
      json kj = {{"center", {d.keyhole.circle.center.x(), d.keyhole.circle.center.y()}}, {"radius", r},
                 {"polygon", json::array()}};
      for (const auto& v : d.keyhole.polygon.vertices()) kj["polygon"].push_back({v.x(), v.y()});
      draw_keyhole_and_zbf(svg, kj, d.zbf);
      svg.circle(pose.position(), cfg.robot.radius, "fill:none;stroke:#093;stroke-width:2");
      d.svg = svg.str();
      return d;
    } catch (const ZbfError&) {
    } catch (const GeometryError&) {
    }
  }
  throw ConfigError("no keyhole could be built or trained at this pose");
}

}  // namespace gapnav
