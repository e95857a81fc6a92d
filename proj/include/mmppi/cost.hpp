#pragma once

#include <optional>
#include <utility>

#include "mmppi/vehicle_dynamics.hpp"
#include "mmppi/world.hpp"

namespace mmppi {

/// Tuning weights and thresholds of the stage cost.
struct CostWeights
{
  double q_eCon = 20.0;
  double q_eLag = 20.0;
  double q_eVel = 2.0;
  double q_ddelta = 1.0;
  double q_jx = 0.1;
  double q_delta = 1e4;
  double q_ax = 1e4;
  double q_beta = 1e4;
  double q_r = 1e4;
  double q_Tf = 1e4;
  double q_St = 1e4;
  double q_V2O = 500.0;
  double q_V2E = 200.0;

  double delta_max = 0.45;   // rad
  double ax_max = 9.5;       // m/s^2
  double beta_max = 0.17;    // rad
  /// Fixed yaw-rate limit; <= 0 selects the friction-based 0.85 * mu * g / vx.
  double r_max = 0.0;
  double S_c = 0.95;
  double vx_min = 0.5;       // m/s
  double D_sft_O = 0.5;      // m
  double D_sft_E = 0.3;      // m

  /// Replace the step indicators by hinges (q * relative exceedance).
  bool smooth_indicators = false;
};

/// Throws ConfigError on negative weights or S_c outside (0, 1).
void validate(const CostWeights & w);

/// Per-mode overrides applied on top of the nominal weights.
struct CostProfile
{
  std::optional<double> q_eVel;
  std::optional<double> q_St;

  CostWeights apply(CostWeights w) const
  {
    if (q_eVel) {w.q_eVel = *q_eVel;}
    if (q_St) {w.q_St = *q_St;}
    return w;
  }
};

/// Individual contributions of one stage cost evaluation (already weighted).
struct StageCostTerms
{
  double contouring = 0.0;
  double lag = 0.0;
  double velocity = 0.0;
  double steer_rate = 0.0;
  double jerk = 0.0;
  double steer_limit = 0.0;
  double accel_limit = 0.0;
  double sideslip_limit = 0.0;
  double yaw_rate_limit = 0.0;
  double tyre_force_limit = 0.0;
  double stop = 0.0;
  double obstacle = 0.0;
  double edge = 0.0;

  double total() const
  {
    return contouring + lag + velocity + steer_rate + jerk + steer_limit + accel_limit +
           sideslip_limit + yaw_rate_limit + tyre_force_limit + stop + obstacle + edge;
  }
};

/// Read-only inputs shared by every stage cost evaluation of a plan step.
struct CostContext
{
  const WorldSnapshot & world;
  const EgoFootprint & footprint;
  const VehicleParams & params;
  const CostWeights & weights;
};

/// Contouring (left-normal) and lag (tangential) errors at arc length theta.
/// Returns {e_con, e_lag}.
std::pair<double, double> contouring_lag_errors(const VehicleState & state, const PathReference & path);

/// log(cosh(vx - v_des)) without overflow for large errors.
double logcosh_vel_error(double vx, double v_des);

/// Circle-to-circle clearance of the footprint to one obstacle (negative when
/// overlapping), with the obstacle extrapolated by `t_ahead` seconds.
double v2o_distance(const VehicleState & state, const EgoFootprint & footprint, const Obstacle & obs, double t_ahead);

/// min(0, clearance - D_sft_O).
double v2o_error(
  const VehicleState & state, const EgoFootprint & footprint, const Obstacle & obs,
  double D_sft_O, double t_ahead = 0.0);

/// Smallest signed clearance of the footprint circles to a road edge.
double v2e_distance(const VehicleState & state, const EgoFootprint & footprint, const RoadEdge & edge);

/// min(0, clearance - D_sft_E).
double v2e_error(const VehicleState & state, const EgoFootprint & footprint, const RoadEdge & edge, double D_sft_E);

/// atan(vy / vx) with vx clamped to kVxEpsilon.
double sideslip(const VehicleState & state);

/// Yaw-rate limit in force for this state.
double yaw_rate_limit(const VehicleState & state, const VehicleParams & params, const CostWeights & w);

/// True when an axle's longitudinal force exceeds S_c * mu * Fz.
bool tyre_force_limit_exceeded(const VehicleState & state, const VehicleParams & params, double S_c);

StageCostTerms stage_cost_terms(
  const VehicleState & state, const ControlRates & u, const CostContext & ctx, double t_ahead);

inline double stage_cost(const VehicleState & state, const ControlRates & u, const CostContext & ctx, double t_ahead)
{
  return stage_cost_terms(state, u, ctx, t_ahead).total();
}

/// Strict overlap test (tangent circles do not collide).
bool collision_check(const VehicleState & state, const EgoFootprint & footprint, const std::vector<Obstacle> & obstacles);

}  // namespace mmppi
