#include "mmppi/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mmppi/errors.hpp"

namespace mmppi {

void validate(const CostWeights & w)
{
  const std::pair<double, const char *> weights[] = {
    {w.q_eCon, "q_eCon"}, {w.q_eLag, "q_eLag"}, {w.q_eVel, "q_eVel"}, {w.q_ddelta, "q_ddelta"},
    {w.q_jx, "q_jx"}, {w.q_delta, "q_delta"}, {w.q_ax, "q_ax"}, {w.q_beta, "q_beta"},
    {w.q_r, "q_r"}, {w.q_Tf, "q_Tf"}, {w.q_St, "q_St"}, {w.q_V2O, "q_V2O"}, {w.q_V2E, "q_V2E"}};
  for (const auto & [value, name] : weights) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ConfigError(std::string("cost weight must be non-negative: ") + name, name);
    }
  }
  if (!(w.S_c > 0.0 && w.S_c < 1.0)) {
    throw ConfigError("S_c must lie in (0, 1)", "S_c");
  }
  if (!(w.delta_max > 0.0 && w.ax_max > 0.0 && w.beta_max > 0.0)) {
    throw ConfigError("delta_max, ax_max and beta_max must be positive", "delta_max");
  }
}

std::pair<double, double> contouring_lag_errors(const VehicleState & s, const PathReference & path)
{
  if (path.empty()) {
    throw ConfigError("empty path", "path");
  }
  const auto ref = path.at(s.theta);
  const Vec2 err = Vec2{s.X, s.Y} - ref.position;
  const Vec2 normal{-ref.tangent.y, ref.tangent.x};
  return {normal.dot(err), ref.tangent.dot(err)};
}

double logcosh_vel_error(double vx, double v_des)
{
  const double e = std::abs(vx - v_des);
  return e + std::log1p(std::exp(-2.0 * e)) - std::numbers::ln2;
}

double v2o_distance(const VehicleState & s, const EgoFootprint & fp, const Obstacle & obs, double t_ahead)
{
  const Vec2 centre = obs.position_at(t_ahead);
  double best = std::numeric_limits<double>::infinity();
  fp.for_each_circle(s.X, s.Y, s.psi, [&](Vec2 c) {
      best = std::min(best, (c - centre).norm() - fp.radius - obs.radius);
    });
  return best;
}

double v2o_error(const VehicleState & s, const EgoFootprint & fp, const Obstacle & obs, double D_sft_O, double t_ahead)
{
  return std::min(0.0, v2o_distance(s, fp, obs, t_ahead) - D_sft_O);
}

double v2e_distance(const VehicleState & s, const EgoFootprint & fp, const RoadEdge & edge)
{
  double best = std::numeric_limits<double>::infinity();
  fp.for_each_circle(s.X, s.Y, s.psi, [&](Vec2 c) {
      best = std::min(best, edge.signed_distance(c) - fp.radius);
    });
  return best;
}

double v2e_error(const VehicleState & s, const EgoFootprint & fp, const RoadEdge & edge, double D_sft_E)
{
  return std::min(0.0, v2e_distance(s, fp, edge) - D_sft_E);
}

double sideslip(const VehicleState & s)
{
  return std::atan(s.vy / std::max(s.vx, kVxEpsilon));
}

double yaw_rate_limit(const VehicleState & s, const VehicleParams & p, const CostWeights & w)
{
  if (w.r_max > 0.0) {
    return w.r_max;
  }
  return 0.85 * p.mu * p.g / std::max(s.vx, kVxEpsilon);
}

bool tyre_force_limit_exceeded(const VehicleState & s, const VehicleParams & p, double S_c)
{
  const TyreForces f = longitudinal_axle_forces(s, p);
  return std::abs(f.Fxf) > S_c * p.mu * f.Fzf || std::abs(f.Fxr) > S_c * p.mu * f.Fzr;
}

namespace {

// Step indicator, or a hinge on the relative exceedance when smoothing.
double limit_penalty(double q, double value, double limit, bool smooth)
{
  if (smooth) {
    return q * std::max(0.0, value / limit - 1.0);
  }
  return value > limit ? q : 0.0;
}

}  // namespace

StageCostTerms stage_cost_terms(
  const VehicleState & s, const ControlRates & u, const CostContext & ctx, double t_ahead)
{
  const CostWeights & w = ctx.weights;
  const PathReference & path = *ctx.world.path;
  StageCostTerms c;

  const auto ref = path.at(s.theta);
  const Vec2 err = Vec2{s.X, s.Y} - ref.position;
  const double e_con = ref.tangent.x * err.y - ref.tangent.y * err.x;
  const double e_lag = ref.tangent.dot(err);
  c.contouring = w.q_eCon * e_con * e_con;
  c.lag = w.q_eLag * e_lag * e_lag;
  c.velocity = w.q_eVel * logcosh_vel_error(s.vx, ref.v_des);
  c.steer_rate = w.q_ddelta * u.ddelta * u.ddelta;
  c.jerk = w.q_jx * u.jx * u.jx;

  const bool smooth = w.smooth_indicators;
  c.steer_limit = limit_penalty(w.q_delta, std::abs(s.delta), w.delta_max, smooth);
  c.accel_limit = limit_penalty(w.q_ax, std::abs(s.ax), w.ax_max, smooth);
  c.sideslip_limit = limit_penalty(w.q_beta, std::abs(sideslip(s)), w.beta_max, smooth);
  c.yaw_rate_limit = limit_penalty(w.q_r, std::abs(s.r), yaw_rate_limit(s, ctx.params, w), smooth);

  if (w.q_Tf > 0.0) {
    const VehicleParams & p = ctx.params;
    const TyreForces f = longitudinal_axle_forces(s, p);
    if (smooth) {
      c.tyre_force_limit = w.q_Tf * std::max(
        std::max(0.0, std::abs(f.Fxf) / (w.S_c * p.mu * f.Fzf) - 1.0),
        std::max(0.0, std::abs(f.Fxr) / (w.S_c * p.mu * f.Fzr) - 1.0));
    } else if (std::abs(f.Fxf) > w.S_c * p.mu * f.Fzf || std::abs(f.Fxr) > w.S_c * p.mu * f.Fzr) {
      c.tyre_force_limit = w.q_Tf;
    }
  }
  if (smooth) {
    c.stop = w.q_St * std::max(0.0, 1.0 - s.vx / w.vx_min);
  } else if (s.vx < w.vx_min) {
    c.stop = w.q_St;
  }

  for (const Obstacle & obs : ctx.world.obstacles) {
    const double e = v2o_error(s, ctx.footprint, obs, w.D_sft_O, t_ahead);
    c.obstacle += w.q_V2O * e * e;
  }
  for (const RoadEdge * edge : ctx.world.edges.both()) {
    if (edge->points.size() < 2) {
      continue;
    }
    const double e = v2e_error(s, ctx.footprint, *edge, w.D_sft_E);
    c.edge += w.q_V2E * e * e;
  }
  return c;
}

bool collision_check(const VehicleState & s, const EgoFootprint & fp, const std::vector<Obstacle> & obstacles)
{
  for (const Obstacle & obs : obstacles) {
    bool hit = false;
    fp.for_each_circle(s.X, s.Y, s.psi, [&](Vec2 c) {
        if ((c - obs.center).norm() < fp.radius + obs.radius) {
          hit = true;
        }
      });
    if (hit) {
      return true;
    }
  }
  return false;
}

}  // namespace mmppi
