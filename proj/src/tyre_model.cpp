#include "mmppi/tyre_model.hpp"

#include <algorithm>
#include <cmath>

#include "mmppi/errors.hpp"

namespace mmppi {

double available_lateral_friction(double fx, double fz, double mu)
{
  if (!(fz > 0.0)) {
    throw ConfigError("normal load must be positive");
  }
  const double capacity = mu * fz;
  return std::sqrt(std::max(0.0, capacity * capacity - fx * fx)) / fz;
}

double saturation_slip_angle(double cornering_stiffness, double mu_y, double fz)
{
  return std::atan(3.0 * mu_y * fz / cornering_stiffness);
}

double fiala_lateral_force(double alpha, double fz, double fx, const TyreConfig & cfg)
{
  const double capacity = cfg.mu * fz;
  const double fx_clamped = std::clamp(fx, -capacity, capacity);
  const double mu_y = available_lateral_friction(fx_clamped, fz, cfg.mu);
  if (mu_y <= 0.0) {
    return 0.0;
  }

  const double limit = mu_y * fz;
  const double c = cfg.cornering_stiffness;
  const double magnitude = std::abs(alpha);
  if (magnitude >= saturation_slip_angle(c, mu_y, fz)) {
    return alpha > 0.0 ? -limit : limit;
  }

  // Evaluated on |alpha| and signed afterwards so the force is exactly odd.
  const double t = std::tan(magnitude);
  const double force = c * t - (c * c / (3.0 * limit)) * t * t +
    (c * c * c / (27.0 * limit * limit)) * t * t * t;
  return alpha > 0.0 ? -force : force;
}

}  // namespace mmppi
