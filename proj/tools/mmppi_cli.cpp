// mmppi: run scenarios, compare planners, benchmark plan-step latency.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "mmppi/config.hpp"
#include "mmppi/errors.hpp"
#include "mmppi/sim_log_io.hpp"

namespace {

using namespace mmppi;

constexpr int kExitOperational = 1;
constexpr int kExitConfig = 2;

std::vector<std::uint64_t> parse_seeds(const std::string & spec)
{
  std::vector<std::uint64_t> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) {
      continue;
    }
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) {
          throw ConfigError("bad seed range '" + item + "'", "seeds");
        }
        for (auto s = lo; s <= hi; ++s) {
          out.push_back(s);
        }
      }
    } catch (const std::logic_error &) {
      throw ConfigError("bad seed '" + item + "'", "seeds");
    }
  }
  if (out.empty()) {
    throw ConfigError("at least one seed is required", "seeds");
  }
  return out;
}

struct Overrides
{
  std::optional<double> lambda;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> horizon;
  std::optional<double> dt;
  std::optional<double> sigma_ddelta;
  std::optional<double> sigma_jx;
  std::optional<std::size_t> workers;

  void apply(SolverConfig & s) const
  {
    if (lambda) {s.lambda = *lambda;}
    if (samples) {s.K = *samples;}
    if (horizon) {s.T = *horizon;}
    if (dt) {s.dt = *dt;}
    if (sigma_ddelta) {s.scale.sigma_ddelta = *sigma_ddelta;}
    if (sigma_jx) {s.scale.sigma_jx = *sigma_jx;}
    if (workers) {s.worker_count = *workers;}
  }
};

void add_overrides(CLI::App * cmd, Overrides & o)
{
  cmd->add_option("--lambda", o.lambda, "Temperature")->check(CLI::PositiveNumber);
  cmd->add_option("--samples", o.samples, "Rollouts per plan step (K)")->check(CLI::PositiveNumber);
  cmd->add_option("--horizon", o.horizon, "Horizon steps (T)")->check(CLI::PositiveNumber);
  cmd->add_option("--dt", o.dt, "Planner step [s]")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma-ddelta", o.sigma_ddelta, "Steering-rate noise std")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma-jx", o.sigma_jx, "Jerk noise std")->check(CLI::PositiveNumber);
}

template<typename Fn>
void write_file(const std::filesystem::path & file, Fn && fn)
{
  std::ofstream out(file);
  if (!out) {
    throw std::runtime_error("cannot write " + file.string());
  }
  fn(out);
}

int cmd_run(
  const std::string & scenario_file, const std::string & mode, const std::string & seeds_spec,
  std::string out_dir, bool plot, const Overrides & overrides)
{
  const ScenarioConfig cfg = load_scenario(scenario_file);
  const auto seeds = parse_seeds(seeds_spec);
  SolverConfig solver = cfg.solver;
  overrides.apply(solver);
  validate(solver);

  std::vector<std::string> modes;
  if (mode == "both") {
    modes = {"multimodal", "baseline"};
  } else {
    modes = {mode};
  }

  std::filesystem::create_directories(out_dir);
  std::printf(
    "%-28s %-10s %6s %-14s %10s %9s %9s %9s %9s\n", "scenario", "mode", "seed", "status", "min_d[m]",
    "max|b|", "max|r|", "mean[ms]", "max[ms]");
  for (const auto & m : modes) {
    for (const auto seed : seeds) {
      ScenarioConfig run_cfg = cfg;
      run_cfg.seed = seed;
      SolverConfig s = m == "baseline" ? baseline_mode(solver) : solver;
      s.sobol_seed = seed;
      const SimLog log = run_scenario(run_cfg, s, run_cfg.weights);
      const auto stem = std::filesystem::path(out_dir) / artifact_stem(cfg.name, m, seed);
      write_file(stem.string() + ".jsonl", [&](std::ostream & o) {write_jsonl(o, log);});
      write_file(stem.string() + ".csv", [&](std::ostream & o) {write_trace_csv(o, log);});
      write_file(stem.string() + ".timing.csv", [&](std::ostream & o) {write_timing_csv(o, log);});
      if (plot) {
        write_file(stem.string() + ".svg", [&](std::ostream & o) {write_svg(o, log, run_cfg);});
      }
      const RunSummary sum = summarize(log);
      std::printf(
        "%-28s %-10s %6llu %-14s %10.3f %9.4f %9.4f %9.2f %9.2f\n", cfg.name.c_str(), m.c_str(),
        static_cast<unsigned long long>(seed), std::string(to_string(sum.status)).c_str(),
        sum.min_obstacle_distance, sum.max_abs_beta, sum.max_abs_r, sum.mean_step_ms, sum.max_step_ms);
      std::fflush(stdout);
    }
  }
  return 0;
}

/// Ego placed on the path 1.5 s ahead of the first obstacle with every
/// obstacle visible, so the full set of modes is exercised.
std::pair<VehicleState, WorldSnapshot> bench_snapshot(const ScenarioConfig & cfg)
{
  ScenarioConfig all = cfg;
  for (auto & obs : all.obstacles) {
    obs.reveal = RevealRule::Always;
  }
  ObstacleRevealer revealer(all);
  WorldSnapshot snap = revealer.snapshot(0.0);

  double s0 = 0.0;
  if (!cfg.obstacles.empty()) {
    s0 = std::max(0.0, cfg.path->project(cfg.obstacles.front().start) - 1.5 * cfg.v0);
  }
  const auto at = cfg.path->at(s0);
  VehicleState x;
  x.X = at.position.x;
  x.Y = at.position.y;
  x.psi = std::atan2(at.tangent.y, at.tangent.x);
  x.vx = cfg.v0;
  x.theta = s0;
  return {x, snap};
}

struct BenchStats
{
  double mean = 0.0;
  double p95 = 0.0;
  double max = 0.0;
  double rollout_mean = 0.0;
};

BenchStats bench_once(const ScenarioConfig & cfg, SolverConfig solver, std::size_t steps)
{
  const auto [x, snap] = bench_snapshot(cfg);
  Planner planner(solver, cfg.vehicle, cfg.weights, cfg.limits, cfg.footprint);
  planner.plan_step(x, snap);  // warm-up
  std::vector<double> wall;
  double rollout = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const auto r = planner.plan_step(x, snap);
    wall.push_back(r.diag.wall_ms);
    rollout += r.diag.rollout_ms;
  }
  std::sort(wall.begin(), wall.end());
  BenchStats st;
  st.mean = std::accumulate(wall.begin(), wall.end(), 0.0) / static_cast<double>(steps);
  st.p95 = wall[std::min(steps - 1, static_cast<std::size_t>(0.95 * static_cast<double>(steps)))];
  st.max = wall.back();
  st.rollout_mean = rollout / static_cast<double>(steps);
  return st;
}

int cmd_bench(const std::string & scenario_file, std::size_t steps, std::size_t workers, const Overrides & overrides)
{
  const ScenarioConfig cfg = load_scenario(scenario_file);
  SolverConfig solver = cfg.solver;
  overrides.apply(solver);
  validate(solver);
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }

  std::printf("K=%zu T=%zu steps=%zu hardware_threads=%u\n", solver.K, solver.T, steps, std::thread::hardware_concurrency());
  std::printf("%8s %10s %10s %10s %12s\n", "workers", "mean[ms]", "p95[ms]", "max[ms]", "rollout[ms]");
  solver.worker_count = 1;
  const BenchStats one = bench_once(cfg, solver, steps);
  std::printf("%8d %10.2f %10.2f %10.2f %12.2f\n", 1, one.mean, one.p95, one.max, one.rollout_mean);
  if (workers > 1) {
    solver.worker_count = workers;
    const BenchStats many = bench_once(cfg, solver, steps);
    std::printf("%8zu %10.2f %10.2f %10.2f %12.2f\n", workers, many.mean, many.p95, many.max, many.rollout_mean);
    std::printf("rollout speedup 1 -> %zu workers: %.2fx\n", workers, one.rollout_mean / many.rollout_mean);
  }
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Multi-modal MPPI planner: closed-loop scenarios and benchmarks"};
  app.require_subcommand(1);

  std::string scenario;
  std::string mode = "multimodal";
  std::string seeds = "0";
  std::string out_dir = "out";
  bool plot = false;
  Overrides overrides;
  auto * run = app.add_subcommand("run", "Run a scenario for each (mode, seed)");
  run->add_option("--scenario", scenario, "Scenario file")->required();
  run->add_option("--mode", mode, "Planner variant")->check(CLI::IsMember({"multimodal", "baseline", "both"}));
  run->add_option("--seeds", seeds, "Seeds, e.g. 0-19 or 1,4,7");
  auto * out_opt = run->add_option("--out", out_dir, "Output directory (default: $MMPPI_OUT_DIR or ./out)");
  run->add_flag("--plot", plot, "Write an SVG per run");
  run->add_option("--workers", overrides.workers, "Rollout worker threads (0 = all)");
  add_overrides(run, overrides);

  std::size_t steps = 50;
  std::size_t workers = 0;
  auto * bench = app.add_subcommand("bench", "Time plan steps on a fixed snapshot");
  bench->add_option("--scenario", scenario, "Scenario file")->required();
  bench->add_option("--steps", steps, "Plan steps to time")->check(CLI::PositiveNumber);
  bench->add_option("--workers", workers, "Worker threads to compare against one (0 = all)");
  add_overrides(bench, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) {
      if (out_opt->count() == 0) {
        if (const char * env = std::getenv("MMPPI_OUT_DIR"); env && *env) {
          out_dir = env;
        }
      }
      return cmd_run(scenario, mode, seeds, out_dir, plot, overrides);
    }
    return cmd_bench(scenario, steps, workers, overrides);
  } catch (const ConfigError & e) {
    std::fprintf(stderr, "%s: %s\n", scenario.c_str(), e.what());
    return kExitConfig;
  } catch (const std::exception & e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOperational;
  }
}
