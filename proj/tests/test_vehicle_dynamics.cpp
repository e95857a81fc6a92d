#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <tuple>

#include "mmppi/errors.hpp"
#include "mmppi/vehicle_dynamics.hpp"

using namespace mmppi;

namespace {

// Second, independent transcription of the single-track equations: array
// based, written from the model equations rather than from the library code.
std::array<double, 9> reference_rhs(
  const std::array<double, 9> & x, double ddelta, double jx,
  const VehicleParams & p, const std::array<double, 4> & F /* Fxf Fyf Fxr Fyr */)
{
  const double psi = x[2], vx = x[3], vy = x[4], r = x[5], delta = x[7];
  const double Fxf = F[0], Fyf = F[1], Fxr = F[2], Fyr = F[3];
  const double Fdrag = p.drag_coeff * vx * vx;
  std::array<double, 9> d{};
  d[0] = vx * std::cos(psi) - vy * std::sin(psi);
  d[1] = vx * std::sin(psi) + vy * std::cos(psi);
  d[2] = r;
  d[3] = (1.0 / p.m) * (Fxr - Fdrag + Fxf * std::cos(delta) - Fyf * std::sin(delta)) + vy * r;
  d[4] = (1.0 / p.m) * (Fyr + Fxf * std::sin(delta) + Fyf * std::cos(delta)) - vx * r;
  d[5] = (1.0 / p.Izz) * (Fyf * p.lf * std::cos(delta) + Fxf * p.lf * std::sin(delta) - Fyr * p.lr);
  d[6] = std::hypot(vx, vy);
  d[7] = ddelta;
  d[8] = jx;
  return d;
}

std::array<double, 9> as_array(const VehicleState & s)
{
  return {s.X, s.Y, s.psi, s.vx, s.vy, s.r, s.theta, s.delta, s.ax};
}

double rel_err(double a, double b)
{
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

VehicleState cruising(double vx)
{
  VehicleState s;
  s.vx = vx;
  return s;
}

}  // namespace

TEST_CASE("static axle loads")
{
  VehicleParams p;
  p.m = 1500.0;
  p.lf = p.lr = 1.4;
  auto [f, r] = axle_normal_loads(p);
  CHECK(f == doctest::Approx(7357.5).epsilon(1e-12));
  CHECK(r == doctest::Approx(7357.5).epsilon(1e-12));

  VehicleParams q;  // m=1380, lf=1.2, lr=1.6
  std::tie(f, r) = axle_normal_loads(q);
  CHECK(f == doctest::Approx(1380.0 * 9.81 * 1.6 / 2.8).epsilon(1e-12));
  CHECK(std::abs(f - 7735.886) < 1e-3);
  CHECK(f + r == q.m * q.g);

  q.lf = -q.lr;
  CHECK_THROWS_AS(axle_normal_loads(q), ConfigError);
}

TEST_CASE("load split conserves weight for random parameters")
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mass(500.0, 4000.0), arm(0.5, 2.5);
  for (int i = 0; i < 1000; ++i) {
    VehicleParams p;
    p.m = mass(rng);
    p.lf = arm(rng);
    p.lr = arm(rng);
    const auto [f, r] = axle_normal_loads(p);
    CHECK(f + r == p.m * p.g);
  }
}

TEST_CASE("slip angles")
{
  VehicleParams p;
  VehicleState s = cruising(20.0);
  auto [af, ar] = slip_angles(s, p);
  CHECK(af == 0.0);
  CHECK(ar == 0.0);

  s.delta = 0.05;
  std::tie(af, ar) = slip_angles(s, p);
  CHECK(af == doctest::Approx(-0.05).epsilon(1e-15));
  CHECK(ar == 0.0);

  s.delta = 0.0;
  s.vy = 0.5;
  s.r = 0.2;
  std::tie(af, ar) = slip_angles(s, p);
  CHECK(af == doctest::Approx(0.036983).epsilon(1e-4));
  CHECK(ar == doctest::Approx(0.0089998).epsilon(1e-4));

  // Below the clamp speed the result is the same as at the clamp speed.
  VehicleState slow = s;
  slow.vx = 0.01;
  VehicleState clamp = s;
  clamp.vx = kVxEpsilon;
  CHECK(slip_angles(slow, p) == slip_angles(clamp, p));
}

TEST_CASE("coasting and rotated-frame derivatives")
{
  VehicleParams p;
  p.drag_coeff = 0.0;
  const TyreForces none;
  VehicleState s = cruising(20.0);
  const auto d = derivatives(s, {}, p, none);
  CHECK(d.X == 20.0);
  CHECK(d.Y == 0.0);
  CHECK(d.psi == 0.0);
  CHECK(d.vx == 0.0);
  CHECK(d.vy == 0.0);
  CHECK(d.r == 0.0);
  CHECK(d.theta == 20.0);

  s.psi = M_PI / 2.0;
  s.vx = 10.0;
  const auto e = derivatives(s, {}, p, none);
  CHECK(std::abs(e.X) < 1e-12);
  CHECK(e.Y == doctest::Approx(10.0));
}

TEST_CASE("derivatives agree with an independent transcription on random states")
{
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VehicleParams p;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    VehicleState s;
    s.X = 100.0 * u(rng);
    s.Y = 100.0 * u(rng);
    s.psi = M_PI * u(rng);
    s.vx = 1.0 + 34.0 * (0.5 + 0.5 * u(rng));
    s.vy = 2.0 * u(rng);
    s.r = 1.0 * u(rng);
    s.theta = 50.0 * (1.0 + u(rng));
    s.delta = 0.5 * u(rng);
    s.ax = 8.0 * u(rng);
    const ControlRates c{0.5 * u(rng), 20.0 * u(rng)};
    const TyreForces f = axle_forces(s, p);
    const auto lib = as_array(derivatives(s, c, p, f));
    const auto ref = reference_rhs(as_array(s), c.ddelta, c.jx, p, {f.Fxf, f.Fyf, f.Fxr, f.Fyr});
    for (std::size_t k = 0; k < 9; ++k) {
      worst = std::max(worst, rel_err(lib[k], ref[k]));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("axle forces stay inside the friction circle")
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VehicleParams p;
  for (int i = 0; i < 10000; ++i) {
    p.mu = 0.2 + 0.5 * (1.0 + u(rng));
    VehicleState s = cruising(1.0 + 30.0 * (0.5 + 0.5 * u(rng)));
    s.vy = 3.0 * u(rng);
    s.r = u(rng);
    s.delta = 0.6 * u(rng);
    s.ax = 15.0 * u(rng);
    const auto f = axle_forces(s, p);
    CHECK(std::hypot(f.Fxf, f.Fyf) <= p.mu * f.Fzf + 1e-6);
    CHECK(std::hypot(f.Fxr, f.Fyr) <= p.mu * f.Fzr + 1e-6);
  }
}

TEST_CASE("rk2 free motion and integrator channels")
{
  VehicleParams p;
  p.drag_coeff = 0.0;
  const VehicleState s = cruising(20.0);
  const auto n = step_rk2(s, {}, 0.05, p);
  CHECK(n.X == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(n.vx == 20.0);
  CHECK(n.vy == 0.0);
  CHECK(n.r == 0.0);

  const auto m = step_rk2(s, {0.1, 0.0}, 0.05, p);
  CHECK(m.delta == doctest::Approx(0.005).epsilon(1e-15));
  const auto k = step_rk2(s, {0.0, 2.0}, 0.05, p);
  CHECK(k.ax == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("rk2 observed order on a steady steer-in manoeuvre")
{
  VehicleParams p;
  VehicleState s0 = cruising(20.0);
  s0.ax = 0.5;
  const ControlRates steer_in{0.02, 0.0};
  const double horizon = 2.0;
  auto run = [&](double dt) {
      VehicleState s = s0;
      const int n = static_cast<int>(std::lround(horizon / dt));
      for (int i = 0; i < n; ++i) {
        s = step_rk2(s, steer_in, dt, p);
      }
      return s;
    };
  const double dt = 0.05;
  const auto ref = run(dt / 100.0);
  auto err = [&](const VehicleState & s) {
      const auto a = as_array(s), b = as_array(ref);
      double e = 0.0;
      for (std::size_t k = 0; k < 9; ++k) {
        e = std::max(e, std::abs(a[k] - b[k]));
      }
      return e;
    };
  const double e1 = err(run(dt));
  const double e2 = err(run(dt / 2.0));
  const double order = std::log2(e1 / e2);
  MESSAGE("observed order " << order);
  CHECK(order >= 1.8);
  CHECK(order <= 2.2);
}

TEST_CASE("straight-line invariance over 50 steps")
{
  VehicleParams p;
  VehicleState s = cruising(25.0);
  s.ax = -2.0;
  for (int i = 0; i < 50; ++i) {
    s = step_rk2(s, {0.0, 1.0}, 0.05, p);
    CHECK(std::abs(s.Y) <= 1e-9);
    CHECK(std::abs(s.vy) <= 1e-9);
    CHECK(std::abs(s.r) <= 1e-9);
  }
}

TEST_CASE("rotating the initial heading rotates the trajectory")
{
  VehicleParams p;
  VehicleState a = cruising(18.0);
  a.delta = 0.02;
  a.vy = 0.3;
  a.r = 0.1;
  for (double phi : {0.3, -1.1, 2.5}) {
    VehicleState b = a;
    b.psi += phi;
    VehicleState sa = a, sb = b;
    const double c = std::cos(phi), sn = std::sin(phi);
    for (int i = 0; i < 50; ++i) {
      const ControlRates u{0.1 * std::sin(0.2 * i), 1.0 - 0.05 * i};
      sa = step_rk2(sa, u, 0.05, p);
      sb = step_rk2(sb, u, 0.05, p);
      CHECK(std::abs(sb.X - (c * sa.X - sn * sa.Y)) <= 1e-9);
      CHECK(std::abs(sb.Y - (sn * sa.X + c * sa.Y)) <= 1e-9);
      CHECK(std::abs(sb.psi - sa.psi - phi) <= 1e-9);
      CHECK(std::abs(sb.vx - sa.vx) <= 1e-9);
      CHECK(std::abs(sb.vy - sa.vy) <= 1e-9);
      CHECK(std::abs(sb.r - sa.r) <= 1e-9);
      CHECK(std::abs(sb.theta - sa.theta) <= 1e-9);
    }
  }
}

TEST_CASE("travelled distance tracks the arc length of the position trace")
{
  VehicleParams p;
  VehicleState s = cruising(15.0);
  double arc = 0.0;
  for (int i = 0; i < 50; ++i) {
    const ControlRates u{0.3 * std::cos(0.15 * i), -1.0};
    const auto n = step_rk2(s, u, 0.05, p);
    arc += std::hypot(n.X - s.X, n.Y - s.Y);
    CHECK(n.theta >= s.theta);
    s = n;
  }
  CHECK(std::abs(s.theta - arc) <= 0.01 * arc);
}

TEST_CASE("parameter validation")
{
  VehicleParams p;
  CHECK_NOTHROW(validate(p));
  p.mu = 1.3;
  CHECK_THROWS_AS(validate(p), ConfigError);
  p.mu = 1.0;
  p.Izz = 0.0;
  CHECK_THROWS_AS(validate(p), ConfigError);
}
