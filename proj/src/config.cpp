#include "mmppi/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mmppi/errors.hpp"

namespace mmppi {

namespace {

using nlohmann::json;

class Reader
{
public:
  explicit Reader(const std::string & text) : text_(text) {}

  int line_of(const std::string & key) const
  {
    const auto pos = text_.find('"' + key + '"');
    if (pos == std::string::npos) {
      return 0;
    }
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

  [[noreturn]] void fail(const std::string & field, const std::string & what) const
  {
    const int line = line_of(leaf(field));
    std::string msg = "field '" + field + "': " + what;
    if (line > 0) {
      msg = "line " + std::to_string(line) + ": " + msg;
    }
    throw ConfigError(msg, field, line);
  }

  const json & child(const json & obj, const std::string & key, const std::string & field) const
  {
    if (!obj.contains(key)) {
      fail(field, "missing required field");
    }
    return obj.at(key);
  }

  double number(const json & v, const std::string & field) const
  {
    if (!v.is_number()) {
      fail(field, "expected a number");
    }
    return v.get<double>();
  }

  double required_number(const json & obj, const std::string & key, const std::string & prefix = {}) const
  {
    const std::string field = prefix + key;
    return number(child(obj, key, field), field);
  }

  template<typename T>
  void optional(const json & obj, const std::string & key, T & out, const std::string & prefix = {}) const
  {
    if (!obj.is_object() || !obj.contains(key)) {
      return;
    }
    const std::string field = prefix + key;
    const json & v = obj.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) {
        fail(field, "expected true or false");
      }
      out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) {
        fail(field, "expected a string");
      }
      out = v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) {
        fail(field, "expected a non-negative integer");
      }
      out = v.get<T>();
    } else {
      out = number(v, field);
    }
  }

  Vec2 point(const json & v, const std::string & field) const
  {
    if (!v.is_array() || v.size() != 2) {
      fail(field, "expected [x, y]");
    }
    return {number(v[0], field), number(v[1], field)};
  }

  std::vector<Vec2> polyline(const json & v, const std::string & field, std::size_t min_points) const
  {
    if (!v.is_array() || v.size() < min_points) {
      fail(field, "expected a list of at least " + std::to_string(min_points) + " [x, y] points");
    }
    std::vector<Vec2> out;
    for (const auto & p : v) {
      out.push_back(point(p, field));
    }
    return out;
  }

private:
  static std::string leaf(const std::string & field)
  {
    const auto dot = field.rfind('.');
    std::string key = dot == std::string::npos ? field : field.substr(dot + 1);
    const auto bracket = key.find('[');
    return bracket == std::string::npos ? key : key.substr(0, bracket);
  }

  const std::string & text_;
};

void read_vehicle(const Reader & r, const json & j, VehicleParams & p)
{
  const std::string pre = "vehicle.";
  r.optional(j, "m", p.m, pre);
  r.optional(j, "Izz", p.Izz, pre);
  r.optional(j, "lf", p.lf, pre);
  r.optional(j, "lr", p.lr, pre);
  r.optional(j, "calpha_f", p.calpha_f, pre);
  r.optional(j, "calpha_r", p.calpha_r, pre);
  r.optional(j, "mu", p.mu, pre);
  r.optional(j, "drag_coeff", p.drag_coeff, pre);
}

void read_weights(const Reader & r, const json & j, CostWeights & w)
{
  const std::string pre = "weights.";
  r.optional(j, "q_eCon", w.q_eCon, pre);
  r.optional(j, "q_eLag", w.q_eLag, pre);
  r.optional(j, "q_eVel", w.q_eVel, pre);
  r.optional(j, "q_ddelta", w.q_ddelta, pre);
  r.optional(j, "q_jx", w.q_jx, pre);
  r.optional(j, "q_delta", w.q_delta, pre);
  r.optional(j, "q_ax", w.q_ax, pre);
  r.optional(j, "q_beta", w.q_beta, pre);
  r.optional(j, "q_r", w.q_r, pre);
  r.optional(j, "q_Tf", w.q_Tf, pre);
  r.optional(j, "q_St", w.q_St, pre);
  r.optional(j, "q_V2O", w.q_V2O, pre);
  r.optional(j, "q_V2E", w.q_V2E, pre);
  r.optional(j, "delta_max", w.delta_max, pre);
  r.optional(j, "ax_max", w.ax_max, pre);
  r.optional(j, "beta_max", w.beta_max, pre);
  r.optional(j, "r_max", w.r_max, pre);
  r.optional(j, "S_c", w.S_c, pre);
  r.optional(j, "vx_min", w.vx_min, pre);
  r.optional(j, "D_sft_O", w.D_sft_O, pre);
  r.optional(j, "D_sft_E", w.D_sft_E, pre);
  r.optional(j, "smooth_indicators", w.smooth_indicators, pre);
}

void read_solver(const Reader & r, const json & j, SolverConfig & s)
{
  const std::string pre = "solver.";
  r.optional(j, "K", s.K, pre);
  r.optional(j, "T", s.T, pre);
  r.optional(j, "dt", s.dt, pre);
  r.optional(j, "lambda", s.lambda, pre);
  r.optional(j, "sigma_ddelta", s.scale.sigma_ddelta, pre);
  r.optional(j, "sigma_jx", s.scale.sigma_jx, pre);
  r.optional(j, "worker_count", s.worker_count, pre);
  r.optional(j, "gate_tcpa", s.gate_tcpa, pre);
  r.optional(j, "importance_correction", s.importance_correction, pre);
  r.optional(j, "mode_costs_in_update", s.mode_costs_in_update, pre);
}

void read_limits(const Reader & r, const json & j, ActuatorLimits & l)
{
  const std::string pre = "limits.";
  r.optional(j, "ddelta_max", l.ddelta_max, pre);
  r.optional(j, "jx_max", l.jx_max, pre);
  r.optional(j, "delta_max", l.delta_max, pre);
  r.optional(j, "ax_max", l.ax_max, pre);
  r.optional(j, "a_engine_max", l.a_engine_max, pre);
}

RevealRule reveal_rule(const Reader & r, const std::string & name, const std::string & field)
{
  if (name == "always") {
    return RevealRule::Always;
  }
  if (name == "ttc") {
    return RevealRule::Ttc;
  }
  if (name == "occluded") {
    return RevealRule::Occluded;
  }
  r.fail(field, "unknown reveal rule '" + name + "' (always, ttc, occluded)");
}

ObstacleScript read_obstacle(const Reader & r, const json & j, const std::string & pre)
{
  ObstacleScript obs;
  obs.start = r.point(r.child(j, "start", pre + "start"), pre + "start");
  r.optional(j, "radius", obs.radius, pre);
  std::string reveal = "ttc";
  r.optional(j, "reveal", reveal, pre);
  obs.reveal = reveal_rule(r, reveal, pre + "reveal");
  r.optional(j, "group", obs.group, pre);
  if (j.contains("velocity")) {
    obs.segments.push_back({0.0, r.point(j.at("velocity"), pre + "velocity")});
  }
  if (j.contains("segments")) {
    const json & segs = j.at("segments");
    if (!segs.is_array()) {
      r.fail(pre + "segments", "expected a list");
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string sp = pre + "segments[" + std::to_string(i) + "].";
      VelocitySegment seg;
      seg.t_start = r.required_number(segs[i], "t", sp);
      seg.velocity = r.point(r.child(segs[i], "velocity", sp + "velocity"), sp + "velocity");
      if (!obs.segments.empty() && seg.t_start < obs.segments.back().t_start) {
        r.fail(sp + "t", "segment start times must be non-decreasing");
      }
      obs.segments.push_back(seg);
    }
  }
  return obs;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string & text)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error & e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw ConfigError("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")", {}, line);
  }
  const Reader r(text);
  if (!doc.is_object()) {
    r.fail("<root>", "expected a JSON object");
  }

  const double version = r.required_number(doc, "schema_version");
  if (version != kScenarioSchemaVersion) {
    r.fail("schema_version", "unsupported version (expected " + std::to_string(kScenarioSchemaVersion) + ")");
  }

  ScenarioConfig cfg;
  r.optional(doc, "name", cfg.name);
  cfg.mu_plant = r.required_number(doc, "mu_plant");
  cfg.v0 = r.required_number(doc, "v0");
  cfg.trigger_ttc = r.required_number(doc, "trigger_ttc");
  r.optional(doc, "t_max", cfg.t_max);
  r.optional(doc, "finish_s", cfg.finish_s);
  r.optional(doc, "seed", cfg.seed);

  // The planner assumes the nominal road friction unless told otherwise.
  cfg.vehicle.mu = cfg.mu_plant;
  if (doc.contains("vehicle")) {
    read_vehicle(r, doc.at("vehicle"), cfg.vehicle);
  }
  if (doc.contains("weights")) {
    read_weights(r, doc.at("weights"), cfg.weights);
  }
  if (doc.contains("solver")) {
    read_solver(r, doc.at("solver"), cfg.solver);
  }
  if (doc.contains("limits")) {
    read_limits(r, doc.at("limits"), cfg.limits);
  }
  if (doc.contains("footprint")) {
    const json & f = doc.at("footprint");
    r.optional(f, "radius", cfg.footprint.radius, "footprint.");
    if (f.contains("offsets")) {
      cfg.footprint.offsets.clear();
      for (const auto & v : f.at("offsets")) {
        cfg.footprint.offsets.push_back(r.number(v, "footprint.offsets"));
      }
    }
  }
  if (doc.contains("plant")) {
    const json & p = doc.at("plant");
    const std::string pre = "plant.";
    r.optional(p, "calpha_factor", cfg.calpha_factor, pre);
    r.optional(p, "mu_factor", cfg.mu_factor, pre);
    r.optional(p, "mass_factor", cfg.mass_factor, pre);
    r.optional(p, "steer_wn", cfg.steer_wn, pre);
    r.optional(p, "steer_zeta", cfg.steer_zeta, pre);
    r.optional(p, "accel_wn", cfg.accel_wn, pre);
    r.optional(p, "accel_zeta", cfg.accel_zeta, pre);
    r.optional(p, "bypass_actuators", cfg.bypass_actuators, pre);
  }

  const json & road = r.child(doc, "road", "road");
  r.optional(road, "lane_width", cfg.lane_width, "road.");
  cfg.road.left.points = r.polyline(r.child(road, "left", "road.left"), "road.left", 2);
  cfg.road.left.inside_left = false;
  cfg.road.right.points = r.polyline(r.child(road, "right", "road.right"), "road.right", 2);
  cfg.road.right.inside_left = true;

  const json & path = r.child(doc, "path", "path");
  const auto waypoints = r.polyline(r.child(path, "waypoints", "path.waypoints"), "path.waypoints", 2);
  std::vector<double> v_des;
  const json & vj = r.child(path, "v_des", "path.v_des");
  if (vj.is_array()) {
    for (const auto & v : vj) {
      v_des.push_back(r.number(v, "path.v_des"));
    }
  } else {
    v_des.push_back(r.number(vj, "path.v_des"));
  }
  if (v_des.size() != 1 && v_des.size() != waypoints.size()) {
    r.fail("path.v_des", "give one speed or one per waypoint");
  }
  try {
    cfg.path = std::make_shared<const PathReference>(waypoints, v_des);
  } catch (const ConfigError & e) {
    r.fail(e.field(), e.what());
  }

  if (doc.contains("obstacles")) {
    const json & obs = doc.at("obstacles");
    if (!obs.is_array()) {
      r.fail("obstacles", "expected a list");
    }
    for (std::size_t i = 0; i < obs.size(); ++i) {
      cfg.obstacles.push_back(read_obstacle(r, obs[i], "obstacles[" + std::to_string(i) + "]."));
    }
  }
  if (doc.contains("occluders")) {
    const json & occ = doc.at("occluders");
    if (!occ.is_array()) {
      r.fail("occluders", "expected a list");
    }
    for (std::size_t i = 0; i < occ.size(); ++i) {
      const std::string f = "occluders[" + std::to_string(i) + "].polygon";
      cfg.occluders.push_back({r.polyline(r.child(occ[i], "polygon", f), f, 3)});
    }
  }

  cfg.solver.sobol_seed = cfg.seed;
  try {
    validate(cfg);
  } catch (const ConfigError & e) {
    if (e.line() == 0 && !e.field().empty()) {
      r.fail(e.field(), e.what());
    }
    throw;
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path & file)
{
  std::ifstream in(file);
  if (!in) {
    throw ConfigError("cannot open scenario file " + file.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace mmppi
