#pragma once

namespace mmppi {

/// Per-axle Fiala tyre parameters.
struct TyreConfig
{
  double cornering_stiffness = 0.0;  // N/rad
  double mu = 1.0;
};

/// Lateral friction coefficient left over by a longitudinal force demand
/// (friction circle). |fx| must already be clamped to mu * fz.
double available_lateral_friction(double fx, double fz, double mu);

/// Slip angle at which the Fiala force reaches full sliding.
double saturation_slip_angle(double cornering_stiffness, double mu_y, double fz);

/// Fiala lateral force for slip angle `alpha` with friction-circle derating.
/// The force opposes the slip: positive alpha gives negative force.
double fiala_lateral_force(double alpha, double fz, double fx, const TyreConfig & cfg);

}  // namespace mmppi
