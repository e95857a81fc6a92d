#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mmppi/errors.hpp"
#include "mmppi/tyre_model.hpp"

using namespace mmppi;

namespace {

const TyreConfig kTyre{90000.0, 1.0};
constexpr double kFz = 7700.0;

}  // namespace

TEST_CASE("friction circle leftovers")
{
  CHECK(available_lateral_friction(0.0, kFz, 0.8) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(available_lateral_friction(0.8 * kFz, kFz, 0.8) == 0.0);
  CHECK(available_lateral_friction(0.6 * 0.8 * kFz, kFz, 0.8) == doctest::Approx(0.8 * 0.8).epsilon(1e-12));
  CHECK_THROWS_AS(available_lateral_friction(0.0, 0.0, 1.0), ConfigError);
}

TEST_CASE("fiala basic values")
{
  CHECK(fiala_lateral_force(0.0, kFz, 0.0, kTyre) == 0.0);
  const double asl = saturation_slip_angle(kTyre.cornering_stiffness, kTyre.mu, kFz);
  CHECK(fiala_lateral_force(2.0 * asl, kFz, 0.0, kTyre) == -kTyre.mu * kFz);
  CHECK(fiala_lateral_force(-2.0 * asl, kFz, 0.0, kTyre) == kTyre.mu * kFz);

  // Near zero slip the force follows the cornering stiffness. The cubic's
  // relative shortfall is x - x^2/3 with x = tan(alpha) / tan(alpha_sl), so
  // the linear law holds to 2% up to about 0.02 alpha_sl.
  for (double frac : {0.001, 0.01, 0.02}) {
    const double a = frac * asl;
    const double linear = -kTyre.cornering_stiffness * a;
    CHECK(std::abs(fiala_lateral_force(a, kFz, 0.0, kTyre) - linear) <= 0.02 * std::abs(linear));
  }
  for (double frac : {0.05, 0.1, 0.5}) {
    const double t = std::tan(frac * asl);
    const double x = t / std::tan(asl);
    const double fy = fiala_lateral_force(frac * asl, kFz, 0.0, kTyre);
    CHECK(-fy / (kTyre.cornering_stiffness * t) == doctest::Approx(1.0 - x + x * x / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("fiala is odd, bounded and saturates continuously")
{
  for (double mu : {0.3, 0.7, 1.0, 1.2}) {
    const TyreConfig cfg{kTyre.cornering_stiffness, mu};
    for (double fx_frac : {0.0, 0.3, 0.6, 0.95}) {
      const double fx = fx_frac * mu * kFz;
      const double mu_y = available_lateral_friction(fx, kFz, mu);
      const double asl = saturation_slip_angle(cfg.cornering_stiffness, mu_y, kFz);
      const double below = fiala_lateral_force(std::nextafter(asl, 0.0), kFz, fx, cfg);
      const double above = fiala_lateral_force(asl, kFz, fx, cfg);
      CHECK(std::abs(below - above) < 1e-9 * mu_y * kFz);
    }
  }

  // 100 x 100 grid over slip angle and longitudinal demand.
  for (int i = 0; i < 100; ++i) {
    const double alpha = -0.5 + i * (1.0 / 99.0);
    for (int j = 0; j < 100; ++j) {
      const double fx = (-1.0 + j * (2.0 / 99.0)) * kFz;
      const double fy = fiala_lateral_force(alpha, kFz, fx, kTyre);
      const double mu_y = available_lateral_friction(std::clamp(fx, -kFz, kFz), kFz, 1.0);
      CHECK(std::abs(fy) <= mu_y * kFz + 1e-9);
      CHECK(fiala_lateral_force(-alpha, kFz, fx, kTyre) == -fy);
    }
  }
}

TEST_CASE("fiala opposes slip and grows monotonically up to saturation")
{
  const double asl = saturation_slip_angle(kTyre.cornering_stiffness, kTyre.mu, kFz);
  double prev = 0.0;
  for (int i = 1; i <= 2000; ++i) {
    const double fy = fiala_lateral_force(asl * i / 2000.0, kFz, 0.0, kTyre);
    CHECK(fy <= prev);
    prev = fy;
  }
}

TEST_CASE("longitudinal demand never increases lateral force")
{
  for (double alpha : {-0.2, -0.03, 0.005, 0.05, 0.3}) {
    double prev = std::abs(fiala_lateral_force(alpha, kFz, 0.0, kTyre));
    for (int j = 1; j <= 200; ++j) {
      const double fx = (j / 200.0) * 1.2 * kFz;  // runs past the clamp
      const double now = std::abs(fiala_lateral_force(alpha, kFz, fx, kTyre));
      CHECK(now <= prev);
      CHECK(std::abs(fiala_lateral_force(alpha, kFz, -fx, kTyre)) == now);
      prev = now;
    }
    CHECK(prev == 0.0);
  }
}
