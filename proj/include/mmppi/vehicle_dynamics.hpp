#pragma once

#include <utility>

#include "mmppi/tyre_model.hpp"

namespace mmppi {

/// Below this speed slip angles use a clamped vx and tyre forces are faded out.
inline constexpr double kVxEpsilon = 0.5;
/// A vehicle slower than this is considered stopped.
inline constexpr double kVxStopped = 0.1;

/// Planner state of the single-track model. `delta` and `ax` are the
/// integrated control inputs.
struct VehicleState
{
  double X = 0.0;      // m
  double Y = 0.0;      // m
  double psi = 0.0;    // rad
  double vx = 0.0;     // m/s, body frame
  double vy = 0.0;     // m/s, body frame
  double r = 0.0;      // rad/s
  double theta = 0.0;  // travelled distance, m
  double delta = 0.0;  // road-wheel angle, rad
  double ax = 0.0;     // longitudinal acceleration demand, m/s^2

  bool operator==(const VehicleState &) const = default;
};

/// Time derivative of a VehicleState, field for field.
using StateDerivative = VehicleState;

/// Control input: rates of the two integrated channels.
struct ControlRates
{
  double ddelta = 0.0;  // rad/s
  double jx = 0.0;      // m/s^3

  bool operator==(const ControlRates &) const = default;
};

struct VehicleParams
{
  double m = 1380.0;
  double Izz = 2634.0;
  double lf = 1.2;
  double lr = 1.6;
  double calpha_f = 90000.0;   // N/rad, per axle
  double calpha_r = 115000.0;  // N/rad, per axle
  double mu = 1.0;
  double drag_coeff = 0.35;    // N s^2 / m^2
  double g = 9.81;

  double wheelbase() const {return lf + lr;}
};

/// Throws ConfigError if any physical parameter is out of range.
void validate(const VehicleParams & params);

struct TyreForces
{
  double Fxf = 0.0;
  double Fyf = 0.0;
  double Fxr = 0.0;
  double Fyr = 0.0;
  double Fzf = 0.0;
  double Fzr = 0.0;
};

/// Static axle loads (no load transfer). Returns {Fzf, Fzr}.
std::pair<double, double> axle_normal_loads(const VehicleParams & params);

/// Front and rear slip angles. vx is clamped to kVxEpsilon from below.
std::pair<double, double> slip_angles(const VehicleState & state, const VehicleParams & params);

/// Normal loads and longitudinal forces only (lateral forces left at zero).
TyreForces longitudinal_axle_forces(const VehicleState & state, const VehicleParams & params);

/// Axle forces for the given state. Longitudinal force m*ax is split by static
/// load and clamped to the friction limit; lateral forces come from the Fiala
/// model derated by the longitudinal demand.
TyreForces axle_forces(const VehicleState & state, const VehicleParams & params);

/// Right-hand side of the single-track model.
StateDerivative derivatives(
  const VehicleState & state, const ControlRates & u,
  const VehicleParams & params, const TyreForces & forces);

/// state + h * rate, field for field.
VehicleState advance(const VehicleState & state, const StateDerivative & rate, double h);

/// Explicit midpoint step. Tyre forces are re-evaluated at the midpoint.
VehicleState step_rk2(
  const VehicleState & state, const ControlRates & u, double dt,
  const VehicleParams & params);

}  // namespace mmppi
