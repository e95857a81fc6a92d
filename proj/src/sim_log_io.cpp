#include "mmppi/sim_log_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

namespace mmppi {

namespace {

using nlohmann::json;

json finite_or_null(double v)
{
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json state_json(const VehicleState & s)
{
  return {
    {"X", s.X}, {"Y", s.Y}, {"psi", s.psi}, {"vx", s.vx}, {"vy", s.vy}, {"r", s.r},
    {"theta", s.theta}, {"delta", s.delta}, {"ax", s.ax}};
}

std::string fmt(double v, int digits = 17)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

std::string artifact_stem(const std::string & scenario, const std::string & mode, std::uint64_t seed)
{
  return scenario + "_" + mode + "_s" + std::to_string(seed);
}

void write_jsonl(std::ostream & out, const SimLog & log)
{
  for (const auto & p : log.plans) {
    const SolverDiagnostics & d = p.diag;
    json modes = json::object();
    for (std::size_t m = 0; m < kModeCount; ++m) {
      const auto & md = d.modes[m];
      if (md.samples == 0) {
        continue;
      }
      modes[std::string(to_string(static_cast<ModeKind>(m)))] = {
        {"samples", md.samples}, {"weight_mass", md.weight_mass},
        {"best_cost", finite_or_null(md.best_cost)},
        {"best_profile_cost", finite_or_null(md.best_profile_cost)}};
    }
    json planned = json::array();
    for (const auto & s : p.planned) {
      planned.push_back({s.X, s.Y});
    }
    const json rec = {
      {"type", "plan"},
      {"t", p.t},
      {"x_init", state_json(p.x_init)},
      {"command", {{"ddelta", p.command.ddelta}, {"jx", p.command.jx}}},
      {"visible_obstacles", p.visible_obstacles},
      {"rho", d.rho},
      {"eta", d.eta},
      {"ess", d.effective_sample_size},
      {"active_modes", d.active_modes},
      {"min_tcpa", finite_or_null(d.tcpa.min_tcpa)},
      {"evasive_side", d.evasive_side},
      {"non_finite", d.non_finite},
      {"degraded", d.degraded},
      {"modes", modes},
      {"planned_xy", planned}};
    out << rec.dump() << '\n';
  }
  for (const auto & e : log.events) {
    out << json{{"type", "event"}, {"t", e.t}, {"kind", e.kind}, {"obstacle", e.obstacle}}.dump() << '\n';
  }
  out << json{
    {"type", "summary"}, {"scenario", log.scenario}, {"mode", log.mode}, {"seed", log.seed},
    {"status", std::string(to_string(log.status))}, {"t_end", log.t_end}}.dump() << '\n';
}

void write_trace_csv(std::ostream & out, const SimLog & log)
{
  out << "t,X,Y,psi,vx,vy,r,delta,ax,min_obstacle_distance\n";
  for (const auto & row : log.trace) {
    out << fmt(row.t) << ',' << fmt(row.X) << ',' << fmt(row.Y) << ',' << fmt(row.psi) << ','
        << fmt(row.vx) << ',' << fmt(row.vy) << ',' << fmt(row.r) << ',' << fmt(row.delta) << ','
        << fmt(row.ax) << ',' << fmt(row.min_obstacle_distance) << '\n';
  }
}

void write_timing_csv(std::ostream & out, const SimLog & log)
{
  out << "t,wall_ms,rollout_ms\n";
  for (const auto & p : log.plans) {
    out << fmt(p.t) << ',' << fmt(p.diag.wall_ms, 6) << ',' << fmt(p.diag.rollout_ms, 6) << '\n';
  }
}

RunSummary summarize(const SimLog & log)
{
  RunSummary s;
  s.status = log.status;
  s.min_obstacle_distance = std::numeric_limits<double>::infinity();
  for (const auto & row : log.trace) {
    s.min_obstacle_distance = std::min(s.min_obstacle_distance, row.min_obstacle_distance);
    if (std::abs(row.vx) > 0.1) {
      s.max_abs_beta = std::max(s.max_abs_beta, std::abs(std::atan2(row.vy, row.vx)));
    }
    s.max_abs_r = std::max(s.max_abs_r, std::abs(row.r));
  }
  for (const auto & p : log.plans) {
    s.mean_step_ms += p.diag.wall_ms;
    s.max_step_ms = std::max(s.max_step_ms, p.diag.wall_ms);
  }
  if (!log.plans.empty()) {
    s.mean_step_ms /= static_cast<double>(log.plans.size());
  }
  return s;
}

namespace {

struct Frame
{
  double xmin, xmax, ymin, ymax, scale;

  double px(double x) const {return (x - xmin) * scale + 20.0;}
  double py(double y) const {return (ymax - y) * scale + 20.0;}
};

void polyline(std::ostream & out, const Frame & f, const std::vector<Vec2> & pts, const char * style)
{
  out << "<polyline fill=\"none\" " << style << " points=\"";
  for (const auto & p : pts) {
    out << fmt(f.px(p.x), 6) << ',' << fmt(f.py(p.y), 6) << ' ';
  }
  out << "\"/>\n";
}

void circle(std::ostream & out, const Frame & f, Vec2 c, double r, const char * style)
{
  out << "<circle cx=\"" << fmt(f.px(c.x), 6) << "\" cy=\"" << fmt(f.py(c.y), 6) << "\" r=\""
      << fmt(r * f.scale, 6) << "\" " << style << "/>\n";
}

}  // namespace

void write_svg(std::ostream & out, const SimLog & log, const ScenarioConfig & cfg)
{
  Frame f{1e300, -1e300, 1e300, -1e300, 1.0};
  auto grow = [&](Vec2 p) {
      f.xmin = std::min(f.xmin, p.x);
      f.xmax = std::max(f.xmax, p.x);
      f.ymin = std::min(f.ymin, p.y);
      f.ymax = std::max(f.ymax, p.y);
    };
  for (const RoadEdge * e : cfg.road.both()) {
    std::for_each(e->points.begin(), e->points.end(), grow);
  }
  for (const auto & row : log.trace) {
    grow({row.X, row.Y});
  }
  f.ymin -= 2.0;
  f.ymax += 2.0;
  const double width = 1200.0;
  f.scale = (width - 40.0) / std::max(f.xmax - f.xmin, 1.0);
  const double height = (f.ymax - f.ymin) * f.scale + 40.0;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << fmt(height, 6)
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const RoadEdge * e : cfg.road.both()) {
    polyline(out, f, e->points, "stroke=\"black\" stroke-width=\"2\"");
  }
  for (const auto & occ : cfg.occluders) {
    auto closed = occ.polygon;
    closed.push_back(closed.front());
    polyline(out, f, closed, "stroke=\"gray\" stroke-width=\"1\" fill-opacity=\"0.3\"");
  }
  polyline(out, f, cfg.path->waypoints(), "stroke=\"gray\" stroke-dasharray=\"6,4\"");

  // Obstacles where they were when first seen and where they ended up.
  std::vector<double> seen(cfg.obstacles.size(), -1.0);
  for (const auto & e : log.events) {
    if (e.kind == "reveal" && e.obstacle >= 0) {
      seen[static_cast<std::size_t>(e.obstacle)] = e.t;
    }
  }
  for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
    const auto & obs = cfg.obstacles[i];
    if (seen[i] >= 0.0) {
      circle(out, f, obs.position_at(seen[i]), obs.radius, "fill=\"orange\" fill-opacity=\"0.4\" stroke=\"orange\"");
    }
    circle(out, f, obs.position_at(log.t_end), obs.radius, "fill=\"red\" fill-opacity=\"0.6\" stroke=\"red\"");
  }

  static const char * mode_styles[kModeCount] = {
    "stroke=\"steelblue\" stroke-width=\"1.5\"",
    "stroke=\"firebrick\" stroke-width=\"1.5\"",
    "stroke=\"seagreen\" stroke-width=\"1.5\"",
    "stroke=\"darkorchid\" stroke-width=\"1.5\""};
  for (const auto & p : log.plans) {
    if (p.diag.active_modes < 2) {
      continue;
    }
    for (std::size_t m = 0; m < kModeCount; ++m) {
      if (!p.diag.modes[m].mean_path.empty()) {
        polyline(out, f, p.diag.modes[m].mean_path, mode_styles[m]);
      }
    }
    break;
  }

  std::vector<Vec2> executed;
  for (std::size_t i = 0; i < log.trace.size(); i += 10) {
    executed.push_back({log.trace[i].X, log.trace[i].Y});
  }
  if (!log.trace.empty()) {
    executed.push_back({log.trace.back().X, log.trace.back().Y});
  }
  polyline(out, f, executed, "stroke=\"navy\" stroke-width=\"3\"");

  out << "<text x=\"20\" y=\"16\" font-family=\"monospace\" font-size=\"13\">" << log.scenario << " | "
      << log.mode << " | seed " << log.seed << " | " << to_string(log.status) << "</text>\n</svg>\n";
}

}  // namespace mmppi
