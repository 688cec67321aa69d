#include "gapnav/bench.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gapnav;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(GAPNAV_TEST_DIR) / "bench_scratch" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

int cli(const std::string& args) {
  const std::string cmd = std::string(GAPNAV_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// CSV with the wall-clock columns cut off.
std::string without_timings(const std::string& csv) {
  std::istringstream is(csv);
  std::string out, line;
  while (std::getline(is, line)) {
    std::size_t pos = 0;
    for (int c = 0; c < 5 && pos != std::string::npos; ++c) pos = line.find(',', pos + 1);
    out += line.substr(0, pos) + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("csv header and rows") {
  CHECK(std::string(kCsvHeader) ==
        "seed,outcome,sim_time_s,path_length_m,min_h,t_gap_ms,t_path_ms,t_zbf_ms,t_nmpc_ms,t_qp_ms");
  RunRow r;
  r.seed = 12;
  r.outcome = sim::Outcome::success;
  r.sim_time = 10.5;
  r.min_h = std::numeric_limits<double>::infinity();
  const std::string row = csv_row(r);
  CHECK(row.rfind("12,success,10.5,0,inf,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 9);
}

TEST_CASE("timing stats") {
  const auto t = timing_stats({4, 1, 3, 2, 5});
  CHECK(t.count == 5);
  CHECK(t.mean == doctest::Approx(3));
  CHECK(t.p50 == 3);
  CHECK(t.max == 5);
  CHECK(timing_stats({}).count == 0);
}

TEST_CASE("config parsing is strict") {
  const auto c = campaign_from_json(json::parse(R"({"scenario":"sector","n_runs":3,"robot":{"order":"first"},
      "sensor":{"fov_deg":60},"planner":{"v_d":0.3,"nmpc":{"N":8}}})"));
  CHECK(c.kind == sim::WorldKind::sector);
  CHECK(c.n_runs == 3);
  CHECK(c.episode.robot.order == sim::RobotOrder::first);
  CHECK(c.episode.sensor.fov == doctest::Approx(std::numbers::pi / 3));
  CHECK(c.episode.planner.v_d == 0.3);
  CHECK(c.episode.planner.nmpc.N == 8);

  CHECK_THROWS_AS(campaign_from_json(json::parse(R"({"n_run": 3})")), ConfigError);
  CHECK_THROWS_AS(campaign_from_json(json::parse(R"({"n_runs": "three"})")), ConfigError);
  CHECK_THROWS_AS(campaign_from_json(json::parse(R"({"scenario": "forest"})")), ConfigError);
  CHECK_THROWS_AS(campaign_from_json(json::parse(R"({"robot": {"order": "third"}})")), ConfigError);
  CHECK_THROWS_AS(campaign_from_json(json::parse(R"({"planner": {"nmpc": {"bogus": 1}}})")), ConfigError);
  CHECK_THROWS_AS(campaign_from_json(json::parse(R"({"n_runs": 0})")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("world files") {
  const fs::path dir = scratch("world");
  sim::World w;
  w.bounds = {Vec2(-4, -4), Vec2(4, 4)};
  w.discs.push_back(Disc(Vec2(1, 1), 0.3));
  w.goal = Vec2(3, 0);
  spit(dir / "w.json", sim::to_json(w).dump());
  spit(dir / "c.json", R"({"world_file": "w.json", "n_runs": 1})");
  const CampaignConfig c = load_config((dir / "c.json").string());
  const sim::World back = make_world(c, 99);
  CHECK(sim::to_json(back).dump() == sim::to_json(w).dump());
  const json j = sim::to_json(w);
  CHECK(j.contains("bounds"));
  CHECK(j.contains("obstacles"));
  CHECK(j.at("obstacles").at(0).at("type") == "disc");
  CHECK(j.at("obstacles").at(0).contains("params"));
}

TEST_CASE("campaign outputs") {
  const fs::path a = scratch("camp_a"), b = scratch("camp_b");
  CampaignConfig c;
  c.n_runs = 3;
  c.seed_base = 40;
  c.out_dir = a.string();
  c.traces = true;
  c.svg = true;
  const auto s = run_campaign(c);
  CHECK(s.n_runs == 3);
  CHECK(s.successes + s.aborts + s.collisions == 3);
  CHECK(s.success_rate + s.abort_rate + s.collision_rate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fs::exists(a / "runs.csv"));
  CHECK(fs::exists(a / "summary.json"));
  CHECK(fs::exists(a / "seed_41.jsonl"));
  CHECK(fs::exists(a / "seed_42.svg"));
  const std::string csv = slurp(a / "runs.csv");
  CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const json summary = json::parse(slurp(a / "summary.json"));
  CHECK(summary.contains("timings"));

  // Parallel execution changes nothing but wall-clock columns.
  c.out_dir = b.string();
  c.threads = 2;
  c.svg = c.traces = false;
  run_campaign(c);
  CHECK(without_timings(slurp(b / "runs.csv")) == without_timings(csv));
}

TEST_CASE("render") {
  // Nothing to draw is still a valid document.
  const std::string blank = render_trace({});
  CHECK(blank.rfind("<svg", 0) == 0);
  CHECK(blank.find("</svg>") != std::string::npos);
  CHECK_THROWS(render_trace({"not json"}));
  CHECK_THROWS_AS(render_trace_file("/nonexistent/trace.jsonl"), IoError);
  CampaignConfig c;
  const auto w = make_world(c, 5);
  auto cfg = c.episode;
  cfg.timeout = 3.0;
  const auto r = sim::run_episode(w, cfg, 5);
  const std::string svg = render_trace(r.trace);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
}

TEST_CASE("zero contour lies on the barrier's zero level") {
  for (const auto& kc : fixture::random_keyholes(5, 21)) {
    const ZbfModel m = fit_zbf(kc.keyhole);
    const Vec2 lo = kc.keyhole.circle.center.array() - 3.0, hi = kc.keyhole.circle.center.array() + 3.0;
    const double cell = 0.05;
    const auto segs = zero_contour(m, lo, hi, cell);
    REQUIRE(!segs.empty());
    double worst = 0.0, gmax = 0.0;
    for (const auto& [p, q] : segs)
      for (const Vec2& x : {p, q}) {
        worst = std::max(worst, std::abs(eval(m, x)));
        gmax = std::max(gmax, gradient(m, x).norm());
      }
    CHECK(worst <= cell * gmax);
  }
}

TEST_CASE("zbf demo") {
  CampaignConfig c;
  const auto w = make_world(c, 2);
  const ZbfDemo d = zbf_demo(w, w.start, c.episode);
  CHECK(!d.contour.empty());
  CHECK(d.svg.find("</svg>") != std::string::npos);
  CHECK(eval(d.zbf, d.keyhole.circle.center) > 0.0);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  spit(dir / "bad_key.json", R"({"n_runz": 2})");
  spit(dir / "bad_json.json", "{ not json");
  spit(dir / "ok.json", R"({"n_runs": 1, "episode": {"timeout": 2.0}})");

  CHECK(cli("") == 1);
  CHECK(cli("fly") == 1);
  CHECK(cli("run --config " + (dir / "bad_key.json").string()) == 1);
  CHECK(cli("run --config " + (dir / "bad_json.json").string()) == 1);
  CHECK(cli("run --config " + (dir / "nope.json").string()) == 2);
  CHECK(cli("render " + (dir / "nope.jsonl").string()) == 2);
  CHECK(cli("episode --config " + (dir / "ok.json").string() + " --out /nonexistent/dir/t.jsonl") == 2);

  CHECK(cli("episode --config " + (dir / "ok.json").string() + " --seed 3 --out " + (dir / "t.jsonl").string()) == 0);
  CHECK(cli("render " + (dir / "t.jsonl").string() + " --out " + (dir / "t.svg").string()) == 0);
  CHECK(slurp(dir / "t.svg").find("</svg>") != std::string::npos);
  CHECK(cli("run --config " + (dir / "ok.json").string() + " --out " + (dir / "run").string()) == 0);
  CHECK(fs::exists(dir / "run" / "runs.csv"));
  CHECK(cli("zbf-demo --seed 1 --out " + (dir / "z.json").string() + " --svg " + (dir / "z.svg").string()) == 0);
  CHECK(json::parse(slurp(dir / "z.json")).contains("zbf"));
}
