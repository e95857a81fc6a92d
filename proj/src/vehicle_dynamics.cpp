#include "mmppi/vehicle_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "mmppi/errors.hpp"

namespace mmppi {

void validate(const VehicleParams & p)
{
  auto positive = [](double v, const char * name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string("vehicle parameter must be positive: ") + name, name);
      }
    };
  positive(p.m, "m");
  positive(p.Izz, "Izz");
  positive(p.lf, "lf");
  positive(p.lr, "lr");
  positive(p.calpha_f, "calpha_f");
  positive(p.calpha_r, "calpha_r");
  positive(p.drag_coeff, "drag_coeff");
  positive(p.g, "g");
  if (!(p.mu > 0.0 && p.mu <= 1.2)) {
    throw ConfigError("friction coefficient must lie in (0, 1.2]", "mu");
  }
}

std::pair<double, double> axle_normal_loads(const VehicleParams & p)
{
  const double wheelbase = p.lf + p.lr;
  if (!(wheelbase > 0.0)) {
    throw ConfigError("wheelbase must be positive", "lf");
  }
  const double weight = p.m * p.g;
  // The smaller load is taken as the remainder of the larger one; that
  // subtraction is exact, so the pair sums to m*g exactly.
  if (p.lr >= p.lf) {
    const double front = weight * p.lr / wheelbase;
    return {front, weight - front};
  }
  const double rear = weight * p.lf / wheelbase;
  return {weight - rear, rear};
}

std::pair<double, double> slip_angles(const VehicleState & s, const VehicleParams & p)
{
  const double vx = std::max(s.vx, kVxEpsilon);
  return {
    std::atan((s.vy + p.lf * s.r) / vx) - s.delta,
    std::atan((s.vy - p.lr * s.r) / vx)};
}

TyreForces longitudinal_axle_forces(const VehicleState & s, const VehicleParams & p)
{
  TyreForces f;
  std::tie(f.Fzf, f.Fzr) = axle_normal_loads(p);
  const double weight = f.Fzf + f.Fzr;

  // Tyres cannot generate force at standstill; fade in over [0, kVxEpsilon].
  const double fade = std::clamp(s.vx / kVxEpsilon, 0.0, 1.0);

  double fx_total = p.m * s.ax;
  if (fx_total < 0.0) {
    fx_total *= fade;
  }
  const double cap_f = p.mu * f.Fzf;
  const double cap_r = p.mu * f.Fzr;
  f.Fxf = std::clamp(fx_total * f.Fzf / weight, -cap_f, cap_f);
  f.Fxr = std::clamp(fx_total * f.Fzr / weight, -cap_r, cap_r);
  return f;
}

TyreForces axle_forces(const VehicleState & s, const VehicleParams & p)
{
  TyreForces f = longitudinal_axle_forces(s, p);
  const double fade = std::clamp(s.vx / kVxEpsilon, 0.0, 1.0);
  const auto [alpha_f, alpha_r] = slip_angles(s, p);
  f.Fyf = fade * fiala_lateral_force(alpha_f, f.Fzf, f.Fxf, {p.calpha_f, p.mu});
  f.Fyr = fade * fiala_lateral_force(alpha_r, f.Fzr, f.Fxr, {p.calpha_r, p.mu});
  return f;
}

StateDerivative derivatives(
  const VehicleState & s, const ControlRates & u,
  const VehicleParams & p, const TyreForces & f)
{
  const double cpsi = std::cos(s.psi);
  const double spsi = std::sin(s.psi);
  const double cdel = std::cos(s.delta);
  const double sdel = std::sin(s.delta);
  const double drag = p.drag_coeff * s.vx * s.vx;

  StateDerivative d;
  d.X = s.vx * cpsi - s.vy * spsi;
  d.Y = s.vx * spsi + s.vy * cpsi;
  d.psi = s.r;
  d.vx = (-f.Fyf * sdel + f.Fxf * cdel + f.Fxr - drag) / p.m + s.r * s.vy;
  d.vy = (f.Fyf * cdel + f.Fxf * sdel + f.Fyr) / p.m - s.r * s.vx;
  d.r = (p.lf * f.Fyf * cdel + p.lf * f.Fxf * sdel - p.lr * f.Fyr) / p.Izz;
  d.theta = std::sqrt(s.vx * s.vx + s.vy * s.vy);
  d.delta = u.ddelta;
  d.ax = u.jx;
  return d;
}

VehicleState advance(const VehicleState & s, const StateDerivative & d, double h)
{
  return {
    s.X + h * d.X, s.Y + h * d.Y, s.psi + h * d.psi,
    s.vx + h * d.vx, s.vy + h * d.vy, s.r + h * d.r,
    s.theta + h * d.theta, s.delta + h * d.delta, s.ax + h * d.ax};
}

VehicleState step_rk2(
  const VehicleState & s, const ControlRates & u, double dt, const VehicleParams & p)
{
  const StateDerivative k1 = derivatives(s, u, p, axle_forces(s, p));
  const VehicleState mid = advance(s, k1, 0.5 * dt);
  const StateDerivative k2 = derivatives(mid, u, p, axle_forces(mid, p));
  return advance(s, k2, dt);
}

}  // namespace mmppi
