#include "gapnav/bench.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace gapnav;
namespace fs = std::filesystem;

namespace {

void write_out(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << content;
  if (!os) throw IoError("write failed: " + path);
}

CampaignConfig config_or_default(const std::string& path) { return path.empty() ? CampaignConfig{} : load_config(path); }

void print_summary(const CampaignSummary& s) {
  std::printf("runs %d  success %.3f  abort %.3f  collision %.3f\n", s.n_runs, s.success_rate, s.abort_rate,
              s.collision_rate);
  for (const auto& [k, t] : s.timings)
    std::printf("  %-6s mean %8.3f ms  p95 %8.3f ms  max %8.3f ms  (n=%zu)\n", k.c_str(), t.mean, t.p95, t.max,
                t.count);
  std::printf("wall %.1f s (timings depend on this machine)\n", s.wall_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gap-based local planner benchmark"};
  app.require_subcommand(1);

  std::string config, out, svg;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs, threads;

  auto* run = app.add_subcommand("run", "seeded Monte-Carlo campaign");
  run->add_option("--config", config, "JSON config");
  run->add_option("--seed", seed, "first seed (overrides seed_base)");
  run->add_option("--runs", runs, "number of episodes (overrides n_runs)");
  run->add_option("--threads", threads, "parallel episodes");
  run->add_option("--out", out, "output directory for runs.csv and summary.json");
  run->add_flag("--svg", "write one SVG per run into the output directory");

  auto* episode = app.add_subcommand("episode", "single seeded episode with full trace");
  episode->add_option("--config", config, "JSON config");
  episode->add_option("--seed", seed, "world and episode seed");
  episode->add_option("--out", out, "trace file (JSONL); stdout when omitted");
  episode->add_option("--svg", svg, "also render the trace to this SVG file");

  std::string trace;
  auto* render = app.add_subcommand("render", "trace to SVG");
  render->add_option("trace", trace, "JSONL trace")->required();
  render->add_option("--out,--svg", out, "SVG file; stdout when omitted");

  auto* demo = app.add_subcommand("zbf-demo", "train and contour one keyhole barrier at a pose");
  demo->add_option("--config", config, "JSON config (pose defaults to the world start)");
  demo->add_option("--seed", seed, "world seed");
  demo->add_option("--out", out, "JSON output (keyhole, model, contour); stdout when omitted");
  demo->add_option("--svg", svg, "SVG file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      CampaignConfig c = config_or_default(config);
      if (seed) c.seed_base = *seed;
      if (runs) c.n_runs = *runs;
      if (threads) c.threads = *threads;
      if (!out.empty()) c.out_dir = out;
      if (run->count("--svg")) c.svg = true;
      if (c.n_runs < 1 || c.threads < 1) throw ConfigError("runs and threads must be positive");
      if (c.svg && c.out_dir.empty()) throw ConfigError("--svg needs an output directory");
      print_summary(run_campaign(c));
    } else if (*episode) {
      CampaignConfig c = config_or_default(config);
      const std::uint64_t s = seed.value_or(c.seed_base);
      const auto w = make_world(c, s);
      const auto r = sim::run_episode(w, c.episode, s);
      std::string text;
      for (const auto& l : r.trace) text += l + "\n";
      write_out(out, text);
      if (!svg.empty()) write_out(svg, render_trace(r.trace));
      std::fprintf(stderr, "seed %llu: %s (%s) after %.2f s, path %.2f m\n", (unsigned long long)s,
                   sim::to_string(r.outcome).c_str(), r.reason.c_str(), r.sim_time, r.path_length);
    } else if (*render) {
      write_out(out, render_trace_file(trace));
    } else if (*demo) {
      CampaignConfig c = config_or_default(config);
      const auto w = make_world(c, seed.value_or(c.seed_base));
      const ZbfDemo d = zbf_demo(w, c.pose.value_or(w.start), c.episode);
      nlohmann::json contour = nlohmann::json::array();
      for (const auto& [a, b] : d.contour) contour.push_back({{a.x(), a.y()}, {b.x(), b.y()}});
      const nlohmann::json j = {{"zbf", to_json(d.zbf)}, {"contour", contour}};
      write_out(out, j.dump() + "\n");
      if (!svg.empty()) write_out(svg, d.svg);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
