#include "mmppi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmppi/errors.hpp"

namespace mmppi {

namespace {

struct PlantRate
{
  StateDerivative vehicle;
  double steer_acc;
  double accel_acc;
};

PlantRate plant_rate(const PlantState & p, const PlantConfig & cfg)
{
  const ControlRates actuator_rates{p.steer_rate, p.accel_rate};
  PlantRate d;
  d.vehicle = derivatives(p.vehicle, actuator_rates, cfg.params, axle_forces(p.vehicle, cfg.params));
  d.steer_acc = cfg.steer_wn * cfg.steer_wn * (p.delta_ref - p.vehicle.delta) -
    2.0 * cfg.steer_zeta * cfg.steer_wn * p.steer_rate;
  d.accel_acc = cfg.accel_wn * cfg.accel_wn * (p.ax_ref - p.vehicle.ax) -
    2.0 * cfg.accel_zeta * cfg.accel_wn * p.accel_rate;
  return d;
}

PlantState plant_advance(const PlantState & p, const PlantRate & d, double h)
{
  PlantState out = p;
  out.vehicle = advance(p.vehicle, d.vehicle, h);
  out.steer_rate = p.steer_rate + h * d.steer_acc;
  out.accel_rate = p.accel_rate + h * d.accel_acc;
  return out;
}

}  // namespace

PlantState plant_step(const PlantState & plant, const ControlRates & command, const PlantConfig & cfg, double dt)
{
  const ActuatorLimits & lim = cfg.limits;
  if (cfg.bypass_actuators) {
    PlantState out = plant;
    out.vehicle = step_rk2(plant.vehicle, command, dt, cfg.params);
    out.delta_ref = out.vehicle.delta;
    out.ax_ref = out.vehicle.ax;
    return out;
  }

  // References ramp over the tick; the filters see the midpoint value.
  PlantState start = plant;
  start.delta_ref = std::clamp(plant.delta_ref + 0.5 * dt * command.ddelta, -lim.delta_max, lim.delta_max);
  start.ax_ref = std::clamp(plant.ax_ref + 0.5 * dt * command.jx, -lim.ax_max, lim.ax_max);
  const PlantRate k1 = plant_rate(start, cfg);
  const PlantRate k2 = plant_rate(plant_advance(start, k1, 0.5 * dt), cfg);
  PlantState out = plant_advance(start, k2, dt);
  out.delta_ref = std::clamp(plant.delta_ref + dt * command.ddelta, -lim.delta_max, lim.delta_max);
  out.ax_ref = std::clamp(plant.ax_ref + dt * command.jx, -lim.ax_max, lim.ax_max);

  if (std::abs(out.vehicle.delta) > lim.delta_max) {
    out.vehicle.delta = std::copysign(lim.delta_max, out.vehicle.delta);
    out.steer_rate = 0.0;
  }
  if (std::abs(out.vehicle.ax) > lim.ax_max) {
    out.vehicle.ax = std::copysign(lim.ax_max, out.vehicle.ax);
    out.accel_rate = 0.0;
  }
  return out;
}

Vec2 ObstacleScript::position_at(double t) const
{
  Vec2 p = start;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const double t0 = segments[i].t_start;
    if (t <= t0) {
      break;
    }
    const double t1 = i + 1 < segments.size() ? std::min(t, segments[i + 1].t_start) : t;
    p = p + segments[i].velocity * (t1 - t0);
  }
  return p;
}

Vec2 ObstacleScript::velocity_at(double t) const
{
  Vec2 v;
  for (const auto & seg : segments) {
    if (t >= seg.t_start) {
      v = seg.velocity;
    }
  }
  return v;
}

namespace {

bool point_in_polygon(Vec2 p, const std::vector<Vec2> & poly)
{
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2)
{
  const Vec2 r = p2 - p1;
  const Vec2 s = q2 - q1;
  const double denom = r.cross(s);
  const Vec2 qp = q1 - p1;
  if (denom == 0.0) {
    if (qp.cross(r) != 0.0) {
      return false;
    }
    // Collinear: overlap of the projections onto r.
    const double rr = r.dot(r);
    if (rr == 0.0) {
      return (p1 - q1).norm() == 0.0;
    }
    const double t0 = qp.dot(r) / rr;
    const double t1 = t0 + s.dot(r) / rr;
    return std::max(t0, t1) >= 0.0 && std::min(t0, t1) <= 1.0;
  }
  const double t = qp.cross(s) / denom;
  const double u = qp.cross(r) / denom;
  return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

}  // namespace

bool segment_hits_polygon(Vec2 a, Vec2 b, const std::vector<Vec2> & polygon)
{
  if (polygon.size() < 3) {
    return false;
  }
  if (point_in_polygon(a, polygon) || point_in_polygon(b, polygon)) {
    return true;
  }
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    if (segments_intersect(a, b, polygon[i], polygon[(i + 1) % polygon.size()])) {
      return true;
    }
  }
  return false;
}

PlantConfig ScenarioConfig::plant_config() const
{
  PlantConfig pc;
  pc.params = vehicle;
  pc.params.mu = mu_plant * mu_factor;
  pc.params.calpha_f *= calpha_factor;
  pc.params.calpha_r *= calpha_factor;
  pc.params.m *= mass_factor;
  pc.limits = limits;
  pc.steer_wn = steer_wn;
  pc.steer_zeta = steer_zeta;
  pc.accel_wn = accel_wn;
  pc.accel_zeta = accel_zeta;
  pc.bypass_actuators = bypass_actuators;
  return pc;
}

void validate(const ScenarioConfig & cfg)
{
  // Scenario-level fields first: the planner's mu is copied from mu_plant,
  // and the error should name the field the user actually wrote.
  if (!(cfg.mu_plant > 0.0 && cfg.mu_plant <= 1.2)) {
    throw ConfigError("mu_plant must lie in (0, 1.2]", "mu_plant");
  }
  if (!(cfg.trigger_ttc > 0.0)) {
    throw ConfigError("trigger_ttc must be positive", "trigger_ttc");
  }
  if (!(cfg.v0 > 0.0)) {
    throw ConfigError("v0 must be positive", "v0");
  }
  if (!cfg.path || cfg.path->empty()) {
    throw ConfigError("scenario needs a reference path", "path");
  }
  validate(cfg.vehicle);
  validate(cfg.weights);
  validate(cfg.solver);
  for (const auto & [value, name] : {
      std::pair{cfg.calpha_factor, "calpha_factor"}, std::pair{cfg.mu_factor, "mu_factor"},
      std::pair{cfg.mass_factor, "mass_factor"}})
  {
    if (!(value >= 0.8 && value <= 1.2)) {
      throw ConfigError(std::string(name) + " must lie in [0.8, 1.2]", name);
    }
  }
  for (const auto & obs : cfg.obstacles) {
    if (!(obs.radius > 0.0)) {
      throw ConfigError("obstacle radius must be positive", "obstacles.radius");
    }
  }
  if (cfg.footprint.offsets.empty() || !(cfg.footprint.radius > 0.0)) {
    throw ConfigError("footprint needs at least one circle with positive radius", "footprint");
  }
  if (!(cfg.t_max > 0.0)) {
    throw ConfigError("t_max must be positive", "t_max");
  }
}

ObstacleRevealer::ObstacleRevealer(const ScenarioConfig & cfg)
: cfg_(cfg), visible_(cfg.obstacles.size(), false)
{
  for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
    visible_[i] = cfg.obstacles[i].reveal == RevealRule::Always;
  }
}

std::vector<std::size_t> ObstacleRevealer::update(double t, const PlantState & plant)
{
  const VehicleState & s = plant.vehicle;
  const Vec2 ego{s.X, s.Y};
  const Vec2 ego_v{
    s.vx * std::cos(s.psi) - s.vy * std::sin(s.psi),
    s.vx * std::sin(s.psi) + s.vy * std::cos(s.psi)};

  std::vector<bool> trigger(cfg_.obstacles.size(), false);
  for (std::size_t i = 0; i < cfg_.obstacles.size(); ++i) {
    if (visible_[i]) {
      continue;
    }
    const ObstacleScript & obs = cfg_.obstacles[i];
    const Vec2 centre = obs.position_at(t);
    if (obs.reveal == RevealRule::Ttc) {
      const Vec2 p = centre - ego;
      const double range = p.norm();
      const double closing = -p.dot(obs.velocity_at(t) - ego_v) / std::max(range, 1e-9);
      trigger[i] = closing > 0.0 && range / closing < cfg_.trigger_ttc;
    } else if (obs.reveal == RevealRule::Occluded) {
      trigger[i] = std::none_of(
        cfg_.occluders.begin(), cfg_.occluders.end(),
        [&](const Occluder & o) {return segment_hits_polygon(ego, centre, o.polygon);});
    }
  }

  std::vector<std::size_t> revealed;
  for (std::size_t i = 0; i < cfg_.obstacles.size(); ++i) {
    if (visible_[i]) {
      continue;
    }
    bool show = trigger[i];
    const int group = cfg_.obstacles[i].group;
    if (!show && group >= 0) {
      for (std::size_t j = 0; j < cfg_.obstacles.size(); ++j) {
        if (trigger[j] && cfg_.obstacles[j].group == group) {
          show = true;
          break;
        }
      }
    }
    if (show) {
      visible_[i] = true;
      revealed.push_back(i);
    }
  }
  return revealed;
}

WorldSnapshot ObstacleRevealer::snapshot(double t) const
{
  WorldSnapshot snap;
  snap.edges = cfg_.road;
  snap.path = cfg_.path;
  for (std::size_t i = 0; i < cfg_.obstacles.size(); ++i) {
    if (visible_[i]) {
      const ObstacleScript & obs = cfg_.obstacles[i];
      snap.obstacles.push_back({obs.position_at(t), obs.radius, obs.velocity_at(t), true});
    }
  }
  return snap;
}

std::size_t ObstacleRevealer::visible_count() const
{
  return static_cast<std::size_t>(std::count(visible_.begin(), visible_.end(), true));
}

WorldSnapshot reveal_obstacles(double t, const PlantState & plant, ObstacleRevealer & revealer)
{
  revealer.update(t, plant);
  return revealer.snapshot(t);
}

std::string_view to_string(RunStatus status)
{
  switch (status) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Collided: return "collided";
    case RunStatus::DepartedRoad: return "departed_road";
    case RunStatus::StoppedSafe: return "stopped_safe";
    case RunStatus::Timeout: return "timeout";
  }
  return "unknown";
}

double SimLog::first_reveal_time() const
{
  for (const auto & e : events) {
    if (e.kind == "reveal") {
      return e.t;
    }
  }
  return -1.0;
}

SolverConfig baseline_mode(SolverConfig cfg)
{
  cfg.prior_only = true;
  return cfg;
}

PlantState initial_plant_state(const ScenarioConfig & cfg)
{
  const auto start = cfg.path->at(0.0);
  PlantState plant;
  plant.vehicle.X = start.position.x;
  plant.vehicle.Y = start.position.y;
  plant.vehicle.psi = std::atan2(start.tangent.y, start.tangent.x);
  plant.vehicle.vx = cfg.v0;
  return plant;
}

SimLog run_scenario(const ScenarioConfig & cfg, const SolverConfig & solver, const CostWeights & weights)
{
  validate(cfg);
  SimLog log;
  log.scenario = cfg.name;
  log.mode = solver.prior_only ? "baseline" : "multimodal";
  log.seed = solver.sobol_seed.value_or(cfg.seed);

  const PlantConfig plant_cfg = cfg.plant_config();
  Planner planner(solver, cfg.vehicle, weights, cfg.limits, cfg.footprint);
  ObstacleRevealer revealer(cfg);
  PlantState plant = initial_plant_state(cfg);

  const auto ticks_per_plan = std::max<long>(1, std::lround(solver.dt / kPlantDt));
  const auto max_ticks = static_cast<long>(std::ceil(cfg.t_max / kPlantDt));
  const double finish_s = cfg.finish_s > 0.0 ? cfg.finish_s : cfg.path->length() - 5.0;

  auto min_distance = [&](const VehicleState & s, double t) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto & obs : cfg.obstacles) {
        const Obstacle o{obs.position_at(t), obs.radius, {}, true};
        best = std::min(best, v2o_distance(s, cfg.footprint, o, 0.0));
      }
      return best;
    };

  ControlRates command;
  bool terminal = false;
  for (long tick = 0; tick <= max_ticks && !terminal; ++tick) {
    const double t = static_cast<double>(tick) * kPlantDt;
    for (std::size_t i : revealer.update(t, plant)) {
      log.events.push_back({t, "reveal", static_cast<int>(i)});
    }

    if (tick % ticks_per_plan == 0) {
      VehicleState x_init = plant.vehicle;
      x_init.delta = plant.delta_ref;
      x_init.ax = plant.ax_ref;
      x_init.theta = cfg.path->project({x_init.X, x_init.Y});
      PlanResult plan = planner.plan_step(x_init, revealer.snapshot(t));
      command = plan.command;
      if (plan.diag.degraded) {
        log.events.push_back({t, "degraded", -1});
      }
      log.plans.push_back({t, x_init, command, std::move(plan.diag), std::move(plan.planned), revealer.visible_count()});
    }

    const VehicleState & s = plant.vehicle;
    log.trace.push_back({t, s.X, s.Y, s.psi, s.vx, s.vy, s.r, s.delta, s.ax, min_distance(s, t)});

    // Terminal checks on the current plant state.
    std::vector<Obstacle> actual;
    for (const auto & obs : cfg.obstacles) {
      actual.push_back({obs.position_at(t), obs.radius, {}, true});
    }
    if (collision_check(s, cfg.footprint, actual)) {
      log.events.push_back({t, "collision", -1});
      log.status = RunStatus::Collided;
      terminal = true;
    } else {
      bool departed = false;
      cfg.footprint.for_each_circle(s.X, s.Y, s.psi, [&](Vec2 c) {
          for (const RoadEdge * edge : cfg.road.both()) {
            if (edge->points.size() >= 2 && edge->signed_distance(c) < 0.0) {
              departed = true;
            }
          }
        });
      if (departed) {
        log.events.push_back({t, "road_departure", -1});
        log.status = RunStatus::DepartedRoad;
        terminal = true;
      } else if (cfg.path->project({s.X, s.Y}) >= finish_s) {
        log.status = RunStatus::Completed;
        terminal = true;
      } else if (s.vx < kVxStopped) {
        log.status = RunStatus::StoppedSafe;
        terminal = true;
      }
    }
    log.t_end = t;
    if (!terminal) {
      plant = plant_step(plant, command, plant_cfg);
    }
  }
  return log;
}

}  // namespace mmppi
