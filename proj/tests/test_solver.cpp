#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "mmppi/errors.hpp"
#include "mmppi/solver.hpp"

using namespace mmppi;

namespace {

WorldSnapshot straight_road()
{
  WorldSnapshot w;
  w.path = std::make_shared<PathReference>(std::vector<Vec2>{{0, 0}, {600, 0}}, std::vector<double>{20.0});
  w.edges.left = {{{-10, 5.25}, {610, 5.25}}, false};
  w.edges.right = {{{-10, -1.75}, {610, -1.75}}, true};
  return w;
}

VehicleState cruising(double X, double vx)
{
  VehicleState s;
  s.X = X;
  s.theta = X;
  s.vx = vx;
  return s;
}

RolloutBatch random_batch(std::size_t K, std::size_t T, std::uint64_t seed)
{
  RolloutBatch b;
  b.resize(K, T, false);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto & c : b.controls) {
    c = {0.2 * n(rng), 3.0 * n(rng)};
  }
  return b;
}

}  // namespace

TEST_CASE("softmax weights for a hand-evaluated cost vector")
{
  const std::vector<double> S{0.0, 1.0, 2.0};
  const auto w = compute_weights(S, 1.0);
  CHECK(std::abs(w.weights[0] - 0.6652) < 1e-4);
  CHECK(std::abs(w.weights[1] - 0.2447) < 1e-4);
  CHECK(std::abs(w.weights[2] - 0.0900) < 1e-4);
  const double eta = 1.0 + std::exp(-1.0) + std::exp(-2.0);
  CHECK(w.eta == doctest::Approx(eta).epsilon(1e-15));
  CHECK(w.rho == 0.0);
  CHECK(w.weights[1] == doctest::Approx(std::exp(-1.0) / eta).epsilon(1e-15));
}

TEST_CASE("softmax weights are uniform for equal costs and select the minimum as lambda shrinks")
{
  const std::vector<double> flat(7, 3.25);
  for (double w : compute_weights(flat, 2.0).weights) {
    CHECK(w == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  }
  const std::vector<double> S{4.0, 2.5, 3.0, 9.0};
  CHECK(std::abs(compute_weights(S, 1e-6).weights[1] - 1.0) <= 1e-9);

  double prev = 0.0;
  for (double lambda : {100.0, 10.0, 1.0, 0.3, 0.1, 0.01}) {
    const double w = compute_weights(S, lambda).weights[1];
    CHECK(w >= prev);
    prev = w;
  }
}

TEST_CASE("softmax normalisation and shift invariance on random costs")
{
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> cost(0.0, 1e5), lam(0.1, 1000.0), shift(-1e4, 1e4);
  std::uniform_int_distribution<int> size(1, 3000);
  double worst_sum = 0.0, worst_shift = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> S(static_cast<std::size_t>(size(rng)));
    for (double & s : S) {
      s = cost(rng);
    }
    const double lambda = lam(rng);
    const auto w = compute_weights(S, lambda);
    double sum = 0.0;
    for (double v : w.weights) {
      sum += v;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));

    const double c = shift(rng);
    std::vector<double> shifted = S;
    for (double & s : shifted) {
      s += c;
    }
    const auto ws = compute_weights(shifted, lambda);
    for (std::size_t k = 0; k < S.size(); ++k) {
      worst_shift = std::max(worst_shift, std::abs(ws.weights[k] - w.weights[k]));
    }
  }
  CHECK(worst_sum <= 1e-12);
  CHECK(worst_shift <= 1e-12);
}

TEST_CASE("weighted update")
{
  auto one = random_batch(1, 10, 1);
  const std::vector<double> w1{1.0};
  const auto u1 = weighted_update(one, w1);
  for (std::size_t t = 0; t < 10; ++t) {
    CHECK(u1[t] == one.control(0)[t]);
  }

  RolloutBatch pm;
  pm.resize(2, 5, false);
  for (std::size_t t = 0; t < 5; ++t) {
    pm.control(0)[t] = {0.3, -2.0};
    pm.control(1)[t] = {-0.3, 2.0};
  }
  const std::vector<double> half{0.5, 0.5};
  for (const auto & c : weighted_update(pm, half)) {
    CHECK(c.ddelta == 0.0);
    CHECK(c.jx == 0.0);
  }

  auto b = random_batch(200, 20, 2);
  std::mt19937_64 rng(3);
  std::vector<double> S(200);
  for (double & s : S) {
    s = std::uniform_real_distribution<double>(0.0, 50.0)(rng);
  }
  const auto w = compute_weights(S, 5.0);
  const auto u = weighted_update(b, w.weights);
  for (std::size_t t = 0; t < 20; ++t) {
    double lo_d = 1e300, hi_d = -1e300, lo_j = 1e300, hi_j = -1e300;
    for (std::size_t k = 0; k < 200; ++k) {
      lo_d = std::min(lo_d, b.control(k)[t].ddelta);
      hi_d = std::max(hi_d, b.control(k)[t].ddelta);
      lo_j = std::min(lo_j, b.control(k)[t].jx);
      hi_j = std::max(hi_j, b.control(k)[t].jx);
    }
    CHECK(u[t].ddelta >= lo_d - 1e-12);
    CHECK(u[t].ddelta <= hi_d + 1e-12);
    CHECK(u[t].jx >= lo_j - 1e-12);
    CHECK(u[t].jx <= hi_j + 1e-12);
  }
}

TEST_CASE("batched rollout costs equal a plain sequential loop")
{
  const auto world = straight_road();
  const VehicleParams params;
  const CostWeights weights;
  const EgoFootprint fp;
  const RolloutContext ctx{world, params, weights, fp, 0.05};
  const auto x0 = cruising(10.0, 18.0);
  const std::vector<CostProfile> profiles(kModeCount);

  RolloutBatch single;
  single.resize(1, 50, false);
  CHECK_EQ(propagate_rollouts(x0, single, profiles, ctx, nullptr), 0u);
  CHECK(single.costs[0] == rollout_cost(x0, single.control(0), ctx));

  auto batch = random_batch(8, 50, 9);
  std::copy(batch.control(2).begin(), batch.control(2).end(), batch.control(6).begin());
  WorkerPool pool(3);
  propagate_rollouts(x0, batch, profiles, ctx, &pool);
  for (std::size_t k = 0; k < 8; ++k) {
    const double seq = rollout_cost(x0, batch.control(k), ctx);
    CHECK(batch.costs[k] == seq);
  }
  CHECK(batch.costs[2] == batch.costs[6]);
}

TEST_CASE("mode profiles remove velocity and stop terms from the profiled cost")
{
  const auto world = straight_road();
  const VehicleParams params;
  CostWeights weights;
  weights.q_eVel = 3.0;
  const EgoFootprint fp;
  const RolloutContext ctx{world, params, weights, fp, 0.05};
  auto batch = random_batch(4, 30, 4);
  batch.modes = {ModeKind::Prior, ModeKind::MaxBrake, ModeKind::MaxAccel, ModeKind::Evasive};
  std::vector<CostProfile> profiles(kModeCount);
  profiles[1].q_eVel = 0.0;
  profiles[1].q_St = 0.0;
  profiles[2].q_eVel = 0.0;
  propagate_rollouts(cruising(0.0, 12.0), batch, profiles, ctx, nullptr);
  CHECK(batch.profile_costs[0] == batch.costs[0]);
  CHECK(batch.profile_costs[1] == doctest::Approx(batch.costs[1] - batch.velocity_terms[1] - batch.stop_terms[1]));
  CHECK(batch.profile_costs[2] == doctest::Approx(batch.costs[2] - batch.velocity_terms[2]));
  CHECK(batch.profile_costs[3] == batch.costs[3]);
}

TEST_CASE("non-finite rollouts are capped and flagged")
{
  const auto world = straight_road();
  const VehicleParams params;
  const CostWeights weights;
  const EgoFootprint fp;
  const RolloutContext ctx{world, params, weights, fp, 0.05};
  auto batch = random_batch(5, 20, 5);
  batch.control(3)[4].jx = std::numeric_limits<double>::quiet_NaN();
  const std::vector<CostProfile> profiles(kModeCount);
  CHECK(propagate_rollouts(cruising(0.0, 15.0), batch, profiles, ctx, nullptr) == 1);
  CHECK(batch.non_finite[3] == 1);
  double largest = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    if (k != 3) {
      CHECK(std::isfinite(batch.costs[k]));
      largest = std::max(largest, batch.costs[k]);
    }
  }
  CHECK(batch.costs[3] == 10.0 * largest);
}

TEST_CASE("planner regulates on an empty straight road")
{
  const auto world = straight_road();
  SolverConfig cfg;
  cfg.sobol_seed = 0;
  VehicleParams params;
  Planner planner(cfg, params, CostWeights{}, ActuatorLimits{}, EgoFootprint{});
  VehicleState x = cruising(0.0, 20.0);
  for (int i = 0; i < 50; ++i) {
    const auto r = planner.plan_step(x, world);
    CHECK(std::abs(r.command.ddelta) < 0.02);
    CHECK(r.diag.active_modes == 1);
    CHECK(r.sequence.size() == cfg.T);
    CHECK(r.planned.size() == cfg.T + 1);
    x = step_rk2(x, r.command, cfg.dt, params);
  }
  CHECK(std::abs(x.Y) < 0.1);
}

TEST_CASE("an obstacle inside the gate brings in all four modes")
{
  auto world = straight_road();
  world.obstacles = {{{30, 0}, 1.0, {}}};
  SolverConfig cfg;
  cfg.K = 400;
  cfg.worker_count = 2;
  Planner planner(cfg, VehicleParams{}, CostWeights{}, ActuatorLimits{}, EgoFootprint{});
  const auto r = planner.plan_step(cruising(0.0, 20.0), world);
  CHECK(r.diag.tcpa.min_tcpa == doctest::Approx(1.5));
  CHECK(r.diag.active_modes == 4);
  CHECK(r.diag.modes[0].samples == 160);
  CHECK(r.diag.modes[1].samples == 80);
  double mass = 0.0;
  for (const auto & m : r.diag.modes) {
    mass += m.weight_mass;
    CHECK(m.best_cost >= r.diag.rho);
  }
  CHECK(std::abs(mass - 1.0) <= 1e-9);
  CHECK(r.diag.eta >= 1.0);
  CHECK(r.diag.effective_sample_size >= 1.0);

  // The unperturbed mean of each mode is rollout 0 of its block.
  const auto & batch = planner.last_batch();
  CHECK(batch.modes[0] == ModeKind::Prior);
  CHECK(batch.modes[160] == ModeKind::MaxBrake);
  CHECK(batch.modes[240] == ModeKind::MaxAccel);
  CHECK(batch.modes[320] == ModeKind::Evasive);
}

TEST_CASE("plan steps are reproducible and independent of the worker count")
{
  auto world = straight_road();
  world.obstacles = {{{35, 0.5}, 1.0, {}}};
  auto run = [&](std::size_t workers) {
      SolverConfig cfg;
      cfg.K = 600;
      cfg.worker_count = workers;
      cfg.sobol_seed = 12;
      Planner planner(cfg, VehicleParams{}, CostWeights{}, ActuatorLimits{}, EgoFootprint{});
      std::vector<ControlSequence> out;
      VehicleState x = cruising(0.0, 20.0);
      for (int i = 0; i < 5; ++i) {
        const auto r = planner.plan_step(x, world);
        out.push_back(r.sequence);
        x = step_rk2(x, r.command, 0.05, VehicleParams{});
      }
      return out;
    };
  const auto a = run(1);
  CHECK(a == run(1));
  CHECK(a == run(3));
  CHECK(a == run(8));
}

TEST_CASE("all rollouts non-finite degrades to the braking mean")
{
  const auto world = straight_road();
  SolverConfig cfg;
  cfg.K = 16;
  Planner planner(cfg, VehicleParams{}, CostWeights{}, ActuatorLimits{}, EgoFootprint{});
  VehicleState x = cruising(0.0, 20.0);
  x.vy = std::numeric_limits<double>::quiet_NaN();
  const auto r = planner.plan_step(x, world);
  CHECK(r.diag.degraded);
  CHECK(r.diag.non_finite == 16);
}

TEST_CASE("solver configuration validation")
{
  SolverConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.lambda = 1.0;
  cfg.K = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.K = 10;
  cfg.T = 200;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}
