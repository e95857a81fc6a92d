#include "mmppi/multimodal.hpp"

#include <algorithm>
#include <cmath>

#include "mmppi/errors.hpp"

namespace mmppi {

std::string_view to_string(ModeKind kind)
{
  switch (kind) {
    case ModeKind::Prior: return "prior";
    case ModeKind::MaxBrake: return "max_brake";
    case ModeKind::MaxAccel: return "max_accel";
    case ModeKind::Evasive: return "evasive";
  }
  return "unknown";
}

std::pair<double, double> tcpa(const VehicleState & ego, const Obstacle & obstacle)
{
  const Vec2 ego_velocity{
    ego.vx * std::cos(ego.psi) - ego.vy * std::sin(ego.psi),
    ego.vx * std::sin(ego.psi) + ego.vy * std::cos(ego.psi)};
  const Vec2 p = obstacle.center - Vec2{ego.X, ego.Y};
  const Vec2 v = obstacle.velocity - ego_velocity;
  const double vv = v.dot(v);
  double t = 0.0;
  if (std::sqrt(vv) >= 1e-6) {
    t = std::max(0.0, -p.dot(v) / vv);
  }
  return {t, (p + v * t).norm()};
}

TcpaReport tcpa_report(const VehicleState & ego, const std::vector<Obstacle> & obstacles)
{
  TcpaReport report;
  report.entries.reserve(obstacles.size());
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto [t, d] = tcpa(ego, obstacles[i]);
    const bool approaching = t > 0.0;
    report.entries.push_back({t, d, approaching});
    if (approaching && t < report.min_tcpa) {
      report.min_tcpa = t;
      report.most_imminent = static_cast<int>(i);
    }
  }
  return report;
}

ControlSequence shift_prior(const ControlSequence & prev)
{
  if (prev.empty()) {
    return prev;
  }
  ControlSequence out(prev.begin() + 1, prev.end());
  out.push_back(prev.back());
  return out;
}

ControlSequence make_admissible(const ControlSequence & seq, const VehicleState & state, const ActuatorLimits & lim, double dt)
{
  ControlSequence out = seq;
  double delta = state.delta;
  double ax = state.ax;
  for (auto & u : out) {
    u.ddelta = std::clamp(u.ddelta, -lim.ddelta_max, lim.ddelta_max);
    u.jx = std::clamp(u.jx, -lim.jx_max, lim.jx_max);
    // Keep the integrated channels inside their bounds; a channel already
    // outside may only move back towards the bound.
    const double d_hi = std::max(0.0, (lim.delta_max - delta) / dt);
    const double d_lo = std::min(0.0, (-lim.delta_max - delta) / dt);
    u.ddelta = std::clamp(u.ddelta, d_lo, d_hi);
    const double a_hi = std::max(0.0, (lim.ax_max - ax) / dt);
    const double a_lo = std::min(0.0, (-lim.ax_max - ax) / dt);
    u.jx = std::clamp(u.jx, a_lo, a_hi);
    delta += u.ddelta * dt;
    ax += u.jx * dt;
  }
  return out;
}

namespace {

double heading_of(Vec2 tangent)
{
  return std::atan2(tangent.y, tangent.x);
}

double wrap_angle(double a)
{
  return std::remainder(a, 2.0 * M_PI);
}

// Steering-rate command that drives delta towards `target` at full rate.
double steer_towards(double target, double delta, const ActuatorLimits & lim, double dt)
{
  target = std::clamp(target, -lim.delta_max, lim.delta_max);
  return std::clamp((target - delta) / dt, -lim.ddelta_max, lim.ddelta_max);
}

// Pure-pursuit road-wheel angle towards the path point one lookahead ahead.
double pure_pursuit_angle(const VehicleState & s, const PathReference & path, double wheelbase)
{
  const double lookahead = std::max(6.0, 0.8 * std::max(s.vx, 0.0));
  const Vec2 target = path.at(s.theta + lookahead).position;
  const Vec2 rel = target - Vec2{s.X, s.Y};
  const double alpha = wrap_angle(std::atan2(rel.y, rel.x) - s.psi);
  const double dist = std::max(rel.norm(), 1e-3);
  return std::atan(2.0 * wheelbase * std::sin(alpha) / dist);
}

// Straight-line longitudinal mode: jerk towards a target acceleration while
// pure pursuit keeps the vehicle on the path.
ControlSequence longitudinal_mean(
  const VehicleState & start, const ModeContext & ctx, std::size_t horizon, double a_target)
{
  const ActuatorLimits & lim = ctx.limits;
  const PathReference & path = *ctx.world.path;
  ControlSequence seq(horizon);
  VehicleState s = start;
  for (auto & u : seq) {
    u.jx = std::clamp((a_target - s.ax) / ctx.dt, -lim.jx_max, lim.jx_max);
    // Steering closes the gap over ~0.2 s rather than in one step.
    const double pp = pure_pursuit_angle(s, path, ctx.params.wheelbase());
    u.ddelta = std::clamp(
      (std::clamp(pp, -lim.delta_max, lim.delta_max) - s.delta) / std::max(0.2, ctx.dt),
      -lim.ddelta_max, lim.ddelta_max);
    s = step_rk2(s, u, ctx.dt, ctx.params);
  }
  return seq;
}

}  // namespace

ControlSequence max_brake_mean(const VehicleState & state, const ModeContext & ctx, std::size_t horizon)
{
  const double a = std::min(ctx.weights.S_c * ctx.params.mu * ctx.params.g, ctx.limits.ax_max);
  return make_admissible(longitudinal_mean(state, ctx, horizon, -a), state, ctx.limits, ctx.dt);
}

ControlSequence max_accel_mean(const VehicleState & state, const ModeContext & ctx, std::size_t horizon)
{
  const double a = std::min(
    {ctx.weights.S_c * ctx.params.mu * ctx.params.g, ctx.limits.a_engine_max, ctx.limits.ax_max});
  return make_admissible(longitudinal_mean(state, ctx, horizon, a), state, ctx.limits, ctx.dt);
}

int evasive_side(const Obstacle & obstacle, const RoadEdges & edges)
{
  auto clearance = [&](const RoadEdge & edge) {
      if (edge.points.size() < 2) {
        return std::numeric_limits<double>::infinity();
      }
      return edge.signed_distance(obstacle.center) - obstacle.radius;
    };
  return clearance(edges.left) >= clearance(edges.right) ? 1 : -1;
}

ControlSequence evasive_mean(
  const VehicleState & state, const ModeContext & ctx, const TcpaReport & report,
  std::size_t horizon, int * side_out)
{
  const ActuatorLimits & lim = ctx.limits;
  const PathReference & path = *ctx.world.path;
  if (report.most_imminent < 0) {
    return make_admissible(ControlSequence(horizon), state, lim, ctx.dt);
  }

  // Obstacle where it will be at the closest approach, in the path frame.
  const auto idx = static_cast<std::size_t>(report.most_imminent);
  Obstacle obs = ctx.world.obstacles[idx];
  obs.center = obs.position_at(report.entries[idx].tcpa);
  const int side = evasive_side(obs, ctx.world.edges);
  if (side_out) {
    *side_out = side;
  }
  const auto obs_ref = path.at(path.project(obs.center));
  const double obs_offset = Vec2{-obs_ref.tangent.y, obs_ref.tangent.x}.dot(obs.center - obs_ref.position);
  const double target_offset = obs_offset +
    side * (obs.radius + ctx.footprint.radius + ctx.weights.D_sft_O + 0.5);

  const double a_lat = ctx.weights.S_c * ctx.params.mu * ctx.params.g;
  const double wheelbase = ctx.params.wheelbase();
  ControlSequence seq(horizon);
  VehicleState s = state;
  bool realigning = false;
  for (auto & u : seq) {
    const double vx = std::max(s.vx, kVxEpsilon);
    const double delta_limit = std::min(lim.delta_max, std::atan(a_lat * wheelbase / (vx * vx)));
    const auto ref = path.at(s.theta);
    const double offset = Vec2{-ref.tangent.y, ref.tangent.x}.dot(Vec2{s.X, s.Y} - ref.position);
    const double heading_err = wrap_angle(s.psi - heading_of(ref.tangent));

    if (!realigning) {
      // Lateral distance still gained while yawing back to the path heading
      // at the friction-limited yaw rate.
      const double along = side * heading_err;
      const double gain_on_realign = along > 0.0 ?
        0.5 * vx * std::sin(along) * along / (a_lat / vx) : 0.0;
      const double remaining = side * (target_offset - offset);
      realigning = remaining - gain_on_realign <= 0.0;
    }

    double delta_cmd;
    if (!realigning) {
      delta_cmd = side * delta_limit;
    } else {
      // Heading regulation with a weak pull onto the target offset.
      const double heading_des = std::clamp(0.3 * (target_offset - offset) / vx, -0.2, 0.2);
      const double r_des = (heading_des - heading_err) / 0.4;
      delta_cmd = std::clamp(std::atan(wheelbase * r_des / vx), -delta_limit, delta_limit);
    }
    u.ddelta = steer_towards(delta_cmd, s.delta, lim, ctx.dt);
    u.jx = 0.0;
    s = step_rk2(s, u, ctx.dt, ctx.params);
  }
  return make_admissible(seq, state, lim, ctx.dt);
}

std::vector<Mode> build_mode_means(
  const ControlSequence & prior, const VehicleState & state, const TcpaReport & report, const ModeContext & ctx)
{
  std::vector<Mode> modes;
  modes.push_back({ModeKind::Prior, make_admissible(prior, state, ctx.limits, ctx.dt), 0, {}, 0});
  if (ctx.prior_only || !(report.min_tcpa < ctx.gate_tcpa)) {
    return modes;
  }
  const std::size_t horizon = prior.size();

  Mode brake{ModeKind::MaxBrake, max_brake_mean(state, ctx, horizon), 0, {}, 0};
  brake.cost_profile.q_eVel = 0.0;
  brake.cost_profile.q_St = 0.0;
  modes.push_back(std::move(brake));

  Mode accel{ModeKind::MaxAccel, max_accel_mean(state, ctx, horizon), 0, {}, 0};
  accel.cost_profile.q_eVel = 0.0;
  modes.push_back(std::move(accel));

  Mode evasive{ModeKind::Evasive, {}, 0, {}, 0};
  evasive.mean = evasive_mean(state, ctx, report, horizon, &evasive.side);
  modes.push_back(std::move(evasive));
  return modes;
}

void allocate_samples(std::size_t K, std::vector<Mode> & modes)
{
  if (modes.empty() || K < modes.size()) {
    throw ConfigError("need at least one rollout per active mode", "K");
  }
  if (modes.size() == 1) {
    modes.front().sample_count = K;
    return;
  }
  const auto share = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(K))));
  std::size_t used = 0;
  for (auto & mode : modes) {
    if (mode.kind != ModeKind::Prior) {
      mode.sample_count = std::min(share, K - used - 1);
      used += mode.sample_count;
    }
  }
  for (auto & mode : modes) {
    if (mode.kind == ModeKind::Prior) {
      mode.sample_count = K - used;
    }
  }
}

}  // namespace mmppi
