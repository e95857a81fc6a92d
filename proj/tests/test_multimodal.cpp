#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "mmppi/errors.hpp"
#include "mmppi/multimodal.hpp"

using namespace mmppi;

namespace {

VehicleState ego_at(double X, double Y, double vx, double psi = 0.0)
{
  VehicleState s;
  s.X = X;
  s.Y = Y;
  s.vx = vx;
  s.psi = psi;
  s.theta = X;
  return s;
}

// Minimise |p + v t| by brute force over [0, 10] s at 1 ms resolution.
double sweep_tcpa(Vec2 p, Vec2 v)
{
  double best_t = 0.0, best = (p).norm();
  for (int i = 1; i <= 10000; ++i) {
    const double t = i * 1e-3;
    const double d = (p + v * t).norm();
    if (d < best) {
      best = d;
      best_t = t;
    }
  }
  return best_t;
}

struct Straight
{
  WorldSnapshot world;
  VehicleParams params;
  CostWeights weights;
  EgoFootprint footprint;
  ActuatorLimits limits;

  Straight()
  {
    world.path = std::make_shared<PathReference>(std::vector<Vec2>{{0, 0}, {400, 0}}, std::vector<double>{20.0});
    world.edges.left = {{{-10, 5.25}, {410, 5.25}}, false};
    world.edges.right = {{{-10, -1.75}, {410, -1.75}}, true};
  }

  ModeContext ctx() {return {world, params, weights, footprint, limits};}
};

}  // namespace

TEST_CASE("tcpa head-on and receding")
{
  const auto ego = ego_at(0, 0, 10.0);
  const auto [t, d] = tcpa(ego, {{20, 0}, 1.0, {0, 0}});
  CHECK(t == 2.0);
  CHECK(d == 0.0);

  const auto [tr, dr] = tcpa(ego, {{-20, 0}, 1.0, {0, 0}});
  CHECK(tr == 0.0);
  CHECK(dr == 20.0);

  // Same velocity as the ego: no relative motion.
  const auto [ts, ds] = tcpa(ego, {{15, 3}, 1.0, {10, 0}});
  CHECK(ts == 0.0);
  CHECK(ds == doctest::Approx(std::hypot(15.0, 3.0)));
}

TEST_CASE("tcpa of a crossing obstacle matches a dense time sweep")
{
  const auto ego = ego_at(0, 0, 10.0);
  const Obstacle obs{{30, -15}, 1.0, {0, 5}};
  const auto [t, d] = tcpa(ego, obs);
  const double oracle = sweep_tcpa({30, -15}, {-10, 5});
  CHECK(std::abs(t - oracle) <= 2e-3);
  CHECK(d == doctest::Approx(((Vec2{30, -15}) + Vec2{-10, 5} * t).norm()));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto e = ego_at(5 * u(rng), 5 * u(rng), 5 + 10 * (1 + u(rng)), 0.5 * u(rng));
    const Obstacle o{{40 * u(rng), 40 * u(rng)}, 1.0, {3 * u(rng), 3 * u(rng)}};
    const Vec2 ev{e.vx * std::cos(e.psi), e.vx * std::sin(e.psi)};
    const double want = sweep_tcpa(o.center - Vec2{e.X, e.Y}, o.velocity - ev);
    const double got = tcpa(e, o).first;
    if (got < 9.99) {
      CHECK(std::abs(got - want) <= 2e-3);
    }
  }
}

TEST_CASE("tcpa report counts approaching obstacles only")
{
  const auto ego = ego_at(0, 0, 10.0);
  const auto rep = tcpa_report(ego, {{{-5, 0}, 1.0, {}}, {{25, 0}, 1.0, {}}, {{15, 0}, 1.0, {}}});
  REQUIRE(rep.entries.size() == 3);
  CHECK_FALSE(rep.entries[0].approaching);
  CHECK(rep.min_tcpa == 1.5);
  CHECK(rep.most_imminent == 2);
  CHECK(std::isinf(tcpa_report(ego, {}).min_tcpa));
}

TEST_CASE("shift prior")
{
  const ControlSequence abc{{1, 10}, {2, 20}, {3, 30}};
  CHECK(shift_prior(abc) == ControlSequence{{2, 20}, {3, 30}, {3, 30}});
  const ControlSequence flat(7, ControlRates{0.1, -2.0});
  CHECK(shift_prior(flat) == flat);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 1; n < 60; ++n) {
    ControlSequence seq(static_cast<std::size_t>(n));
    for (auto & c : seq) {
      c = {u(rng), u(rng)};
    }
    const auto out = shift_prior(seq);
    CHECK(out.size() == seq.size());
    CHECK(out.back() == seq.back());
  }
}

TEST_CASE("gate opens below the threshold only")
{
  Straight w;
  const auto ego = ego_at(0, 0, 20.0);
  const ControlSequence prior(50);

  TcpaReport closed;
  closed.min_tcpa = 2.5;
  CHECK(build_mode_means(prior, ego, closed, w.ctx()).size() == 1);
  closed.min_tcpa = 2.0;
  CHECK(build_mode_means(prior, ego, closed, w.ctx()).size() == 1);

  w.world.obstacles = {{{30, 0}, 1.0, {}}};
  const auto rep = tcpa_report(ego, w.world.obstacles);
  REQUIRE(rep.min_tcpa == 1.5);
  const auto modes = build_mode_means(prior, ego, rep, w.ctx());
  REQUIRE(modes.size() == 4);
  CHECK(modes[0].kind == ModeKind::Prior);
  CHECK(modes[1].kind == ModeKind::MaxBrake);
  CHECK(modes[2].kind == ModeKind::MaxAccel);
  CHECK(modes[3].kind == ModeKind::Evasive);
  CHECK(modes[1].cost_profile.q_eVel == 0.0);
  CHECK(modes[1].cost_profile.q_St == 0.0);
  CHECK(modes[2].cost_profile.q_eVel == 0.0);
  CHECK_FALSE(modes[2].cost_profile.q_St.has_value());
  CHECK_FALSE(modes[3].cost_profile.q_eVel.has_value());

  auto ctx = w.ctx();
  ctx.prior_only = true;
  CHECK(build_mode_means(prior, ego, rep, ctx).size() == 1);
}

TEST_CASE("every mode mean respects the actuator bounds")
{
  Straight w;
  w.world.obstacles = {{{30, 0}, 1.0, {}}};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    auto ego = ego_at(0, 0.5 * u(rng), 15 + 5 * u(rng), 0.05 * u(rng));
    ego.delta = 0.4 * u(rng);
    ego.ax = 8.0 * u(rng);
    ControlSequence prior(50);
    for (auto & c : prior) {
      c = {2.0 * u(rng), 80.0 * u(rng)};
    }
    const auto rep = tcpa_report(ego, w.world.obstacles);
    for (const auto & mode : build_mode_means(prior, ego, rep, w.ctx())) {
      const auto traj = [&] {
          std::vector<VehicleState> out{ego};
          for (const auto & c : mode.mean) {
            out.push_back(step_rk2(out.back(), c, 0.05, w.params));
          }
          return out;
        }();
      for (const auto & s : traj) {
        CHECK(std::abs(s.delta) <= w.limits.delta_max + 1e-12);
        CHECK(std::abs(s.ax) <= w.limits.ax_max + 1e-12);
      }
    }
  }
}

TEST_CASE("max brake reaches full deceleration and stops in time")
{
  Straight w;
  w.params.mu = 1.0;
  const double v0 = 20.0;
  const auto ego = ego_at(0, 0, v0);
  const std::size_t horizon = 100;
  const auto ctx = w.ctx();
  const auto mean = max_brake_mean(ego, ctx, horizon);
  const double a = w.weights.S_c * w.params.mu * w.params.g;
  const auto ramp = static_cast<std::size_t>(std::ceil(a / w.limits.jx_max / ctx.dt));

  VehicleState s = ego;
  double stop_time = -1.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    s = step_rk2(s, mean[k], ctx.dt, w.params);
    if (k + 1 == ramp) {
      CHECK(s.ax == doctest::Approx(-a).epsilon(1e-9));
    }
    if (stop_time < 0.0 && s.vx < 0.1) {
      stop_time = static_cast<double>(k + 1) * ctx.dt;
    }
  }
  REQUIRE(stop_time > 0.0);
  CHECK(stop_time <= v0 / a + 0.3);
}

TEST_CASE("max accel and evasive means")
{
  Straight w;
  const auto ego = ego_at(0, 0, 20.0);
  const auto ctx = w.ctx();
  const auto acc = max_accel_mean(ego, ctx, 50);
  VehicleState s = ego;
  for (const auto & c : acc) {
    s = step_rk2(s, c, ctx.dt, w.params);
  }
  CHECK(s.ax == doctest::Approx(w.limits.a_engine_max).epsilon(1e-9));
  CHECK(std::abs(s.Y) < 0.05);

  // Obstacle in the right lane: more room on the left.
  w.world.obstacles = {{{40, 0}, 1.0, {}}};
  const auto rep = tcpa_report(ego, w.world.obstacles);
  int side = 0;
  const auto ev = evasive_mean(ego, w.ctx(), rep, 50, &side);
  CHECK(side == 1);
  s = ego;
  double y_max = 0.0;
  for (const auto & c : ev) {
    s = step_rk2(s, c, ctx.dt, w.params);
    y_max = std::max(y_max, s.Y);
    CHECK(c.jx == 0.0);
  }
  CHECK(y_max > 2.0);
  CHECK(evasive_side({{40, 3.5}, 1.0, {}}, w.world.edges) == -1);
  // Equal clearance breaks towards the left.
  CHECK(evasive_side({{40, 1.75}, 1.0, {}}, w.world.edges) == 1);
}

TEST_CASE("sample allocation")
{
  auto modes_of = [](std::size_t n) {
      std::vector<Mode> m(n);
      for (std::size_t i = 0; i < n; ++i) {
        m[i].kind = static_cast<ModeKind>(i);
      }
      return m;
    };
  auto one = modes_of(1);
  allocate_samples(2600, one);
  CHECK(one[0].sample_count == 2600);

  auto four = modes_of(4);
  allocate_samples(2600, four);
  CHECK(four[0].sample_count == 1040);
  CHECK(four[1].sample_count == 520);
  CHECK(four[2].sample_count == 520);
  CHECK(four[3].sample_count == 520);

  for (std::size_t K = 4; K < 3000; K += 7) {
    auto m = modes_of(4);
    allocate_samples(K, m);
    std::size_t sum = 0;
    for (const auto & x : m) {
      CHECK(x.sample_count >= 1);
      sum += x.sample_count;
    }
    CHECK(sum == K);
  }
  auto few = modes_of(4);
  CHECK_THROWS_AS(allocate_samples(3, few), ConfigError);
}
