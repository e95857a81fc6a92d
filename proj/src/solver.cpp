#include "mmppi/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "mmppi/errors.hpp"

namespace mmppi {

void validate(const SolverConfig & cfg)
{
  if (cfg.K < 1) {
    throw ConfigError("K must be at least 1", "K");
  }
  if (cfg.T < 1) {
    throw ConfigError("T must be at least 1", "T");
  }
  if (2 * cfg.T > SobolStream::kMaxDimension) {
    throw ConfigError("T too large for the Sobol direction table", "T");
  }
  if (!(cfg.dt > 0.0)) {
    throw ConfigError("dt must be positive", "dt");
  }
  if (!(cfg.lambda > 0.0)) {
    throw ConfigError("lambda must be positive", "lambda");
  }
  if (!(cfg.scale.sigma_ddelta > 0.0) || !(cfg.scale.sigma_jx > 0.0)) {
    throw ConfigError("perturbation sigmas must be positive", "sigma_ddelta");
  }
}

void RolloutBatch::resize(std::size_t k, std::size_t t, bool keep_trajectories)
{
  K = k;
  T = t;
  controls.assign(k * t, ControlRates{});
  trajectories.assign(keep_trajectories ? k * (t + 1) : 0, VehicleState{});
  costs.assign(k, 0.0);
  profile_costs.assign(k, 0.0);
  velocity_terms.assign(k, 0.0);
  stop_terms.assign(k, 0.0);
  modes.assign(k, ModeKind::Prior);
  non_finite.assign(k, 0);
}

WeightResult compute_weights(std::span<const double> costs, double lambda)
{
  WeightResult out;
  if (costs.empty()) {
    return out;
  }
  out.rho = *std::min_element(costs.begin(), costs.end());
  out.weights.resize(costs.size());
  for (std::size_t k = 0; k < costs.size(); ++k) {
    out.weights[k] = std::exp(-(costs[k] - out.rho) / lambda);
    out.eta += out.weights[k];
  }
  for (double & w : out.weights) {
    w /= out.eta;
  }
  return out;
}

ControlSequence weighted_update(const RolloutBatch & batch, std::span<const double> weights)
{
  ControlSequence out(batch.T);
  for (std::size_t k = 0; k < batch.K; ++k) {
    const double w = weights[k];
    if (w == 0.0) {
      continue;
    }
    const auto u = batch.control(k);
    for (std::size_t t = 0; t < batch.T; ++t) {
      out[t].ddelta += w * u[t].ddelta;
      out[t].jx += w * u[t].jx;
    }
  }
  return out;
}

namespace {

struct RolloutOutcome
{
  double cost = 0.0;
  double velocity = 0.0;
  double stop = 0.0;
  bool finite = true;
};

bool finite_state(const VehicleState & s)
{
  return std::isfinite(s.X) && std::isfinite(s.Y) && std::isfinite(s.psi) && std::isfinite(s.vx) &&
         std::isfinite(s.vy) && std::isfinite(s.r) && std::isfinite(s.theta) &&
         std::isfinite(s.delta) && std::isfinite(s.ax);
}

RolloutOutcome evaluate(
  const VehicleState & x_init, std::span<const ControlRates> controls,
  const RolloutContext & ctx, VehicleState * trajectory)
{
  const CostContext cost_ctx{ctx.world, ctx.footprint, ctx.params, ctx.weights};
  RolloutOutcome out;
  VehicleState x = x_init;
  if (trajectory) {
    trajectory[0] = x;
  }
  for (std::size_t t = 0; t < controls.size(); ++t) {
    x = step_rk2(x, controls[t], ctx.dt, ctx.params);
    if (trajectory) {
      trajectory[t + 1] = x;
    }
    const StageCostTerms terms = stage_cost_terms(x, controls[t], cost_ctx, static_cast<double>(t + 1) * ctx.dt);
    out.cost += terms.total();
    out.velocity += terms.velocity;
    out.stop += terms.stop;
  }
  out.finite = std::isfinite(out.cost) && finite_state(x);
  return out;
}

}  // namespace

double rollout_cost(
  const VehicleState & x_init, std::span<const ControlRates> controls,
  const RolloutContext & ctx, VehicleState * trajectory)
{
  return evaluate(x_init, controls, ctx, trajectory).cost;
}

std::vector<VehicleState> propagate(
  const VehicleState & x_init, std::span<const ControlRates> controls, const VehicleParams & params, double dt)
{
  std::vector<VehicleState> out;
  out.reserve(controls.size() + 1);
  out.push_back(x_init);
  for (const auto & u : controls) {
    out.push_back(step_rk2(out.back(), u, dt, params));
  }
  return out;
}

std::size_t propagate_rollouts(
  const VehicleState & x_init, RolloutBatch & batch, const std::vector<CostProfile> & profiles,
  const RolloutContext & ctx, WorkerPool * pool)
{
  const bool keep = !batch.trajectories.empty();
  auto body = [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        VehicleState * traj = keep ? &batch.trajectories[k * (batch.T + 1)] : nullptr;
        const RolloutOutcome r = evaluate(x_init, batch.control(k), ctx, traj);
        batch.costs[k] = r.cost;
        batch.velocity_terms[k] = r.velocity;
        batch.stop_terms[k] = r.stop;
        batch.non_finite[k] = r.finite ? 0 : 1;

        const CostProfile & profile = profiles[static_cast<std::size_t>(batch.modes[k])];
        double profiled = r.cost;
        if (profile.q_eVel && ctx.weights.q_eVel > 0.0) {
          profiled -= r.velocity * (1.0 - *profile.q_eVel / ctx.weights.q_eVel);
        }
        if (profile.q_St && ctx.weights.q_St > 0.0) {
          profiled -= r.stop * (1.0 - *profile.q_St / ctx.weights.q_St);
        }
        batch.profile_costs[k] = profiled;
      }
    };
  if (pool) {
    pool->parallel_for(batch.K, body);
  } else {
    body(0, batch.K);
  }

  double largest = 0.0;
  std::size_t flagged = 0;
  for (std::size_t k = 0; k < batch.K; ++k) {
    if (batch.non_finite[k]) {
      ++flagged;
    } else {
      largest = std::max({largest, batch.costs[k], batch.profile_costs[k]});
    }
  }
  if (flagged > 0) {
    const double cap = 10.0 * std::max(largest, 1.0);
    for (std::size_t k = 0; k < batch.K; ++k) {
      if (batch.non_finite[k]) {
        batch.costs[k] = cap;
        batch.profile_costs[k] = cap;
      }
    }
  }
  return flagged;
}

Planner::Planner(
  SolverConfig config, VehicleParams params, CostWeights weights, ActuatorLimits limits,
  EgoFootprint footprint)
: config_(config),
  params_(params),
  weights_(weights),
  limits_(limits),
  footprint_(std::move(footprint)),
  prior_(config.T),
  stream_((validate(config), 2 * config.T), config.sobol_seed),
  pool_(std::make_unique<WorkerPool>(config.worker_count))
{
  validate(params_);
  validate(weights_);
  // Index 0 is the all-zeros point, which has no Gaussian image.
  stream_.skip(1);
}

PlanResult Planner::plan_step(const VehicleState & x_init, const WorldSnapshot & world)
{
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  const std::size_t K = config_.K;
  const std::size_t T = config_.T;

  PlanResult result;
  SolverDiagnostics & diag = result.diag;

  const ControlSequence shifted = shift_prior(prior_);
  diag.tcpa = tcpa_report(x_init, world.obstacles);
  const ModeContext mode_ctx{
    world, params_, weights_, footprint_, limits_, config_.dt, config_.gate_tcpa, config_.prior_only};
  std::vector<Mode> modes = build_mode_means(shifted, x_init, diag.tcpa, mode_ctx);
  allocate_samples(K, modes);
  diag.active_modes = modes.size();

  std::vector<CostProfile> profiles(kModeCount);
  for (const Mode & m : modes) {
    profiles[static_cast<std::size_t>(m.kind)] = m.cost_profile;
    if (m.kind == ModeKind::Evasive) {
      diag.evasive_side = m.side;
    }
  }

  // Each mode's first rollout is its unperturbed mean; the rest take the
  // next Sobol points in (mode, rollout) order.
  const std::size_t perturbed = K - modes.size();
  PointSet noise;
  if (perturbed > 0) {
    noise = gaussian_perturbations(stream_.next(perturbed), config_.scale, T);
  }
  batch_.resize(K, T, config_.keep_trajectories);
  std::vector<double> correction(config_.importance_correction ? K : 0, 0.0);
  std::size_t k = 0;
  std::size_t row = 0;
  for (const Mode & m : modes) {
    for (std::size_t i = 0; i < m.sample_count; ++i, ++k) {
      batch_.modes[k] = m.kind;
      auto u = batch_.control(k);
      if (i == 0) {
        std::copy(m.mean.begin(), m.mean.end(), u.begin());
        continue;
      }
      for (std::size_t t = 0; t < T; ++t) {
        u[t].ddelta = std::clamp(m.mean[t].ddelta + noise(row, t), -limits_.ddelta_max, limits_.ddelta_max);
        u[t].jx = std::clamp(m.mean[t].jx + noise(row, T + t), -limits_.jx_max, limits_.jx_max);
        if (config_.importance_correction) {
          const double sd = config_.scale.sigma_ddelta;
          const double sj = config_.scale.sigma_jx;
          correction[k] += m.mean[t].ddelta * (u[t].ddelta - m.mean[t].ddelta) / (sd * sd) +
            m.mean[t].jx * (u[t].jx - m.mean[t].jx) / (sj * sj);
        }
      }
      ++row;
    }
  }

  const RolloutContext rollout_ctx{world, params_, weights_, footprint_, config_.dt};
  const auto t_rollout = clock::now();
  diag.non_finite = propagate_rollouts(x_init, batch_, profiles, rollout_ctx, pool_.get());
  diag.rollout_ms = std::chrono::duration<double, std::milli>(clock::now() - t_rollout).count();

  if (config_.importance_correction) {
    for (std::size_t j = 0; j < K; ++j) {
      batch_.costs[j] += config_.lambda * correction[j];
      batch_.profile_costs[j] += config_.lambda * correction[j];
    }
  }

  if (diag.non_finite == K) {
    diag.degraded = true;
    result.sequence = max_brake_mean(x_init, mode_ctx, T);
  } else {
    const auto & costs = config_.mode_costs_in_update ? batch_.profile_costs : batch_.costs;
    const WeightResult w = compute_weights(costs, config_.lambda);
    diag.rho = w.rho;
    diag.eta = w.eta;
    double sum_sq = 0.0;
    for (double v : w.weights) {
      sum_sq += v * v;
    }
    diag.effective_sample_size = 1.0 / sum_sq;

    for (auto & md : diag.modes) {
      md.best_cost = std::numeric_limits<double>::infinity();
      md.best_profile_cost = std::numeric_limits<double>::infinity();
    }
    for (std::size_t j = 0; j < K; ++j) {
      auto & md = diag.modes[static_cast<std::size_t>(batch_.modes[j])];
      ++md.samples;
      md.weight_mass += w.weights[j];
      md.best_cost = std::min(md.best_cost, batch_.costs[j]);
      md.best_profile_cost = std::min(md.best_profile_cost, batch_.profile_costs[j]);
    }
    result.sequence = weighted_update(batch_, w.weights);
  }

  if (modes.size() > 1) {
    for (const Mode & m : modes) {
      auto & md = diag.modes[static_cast<std::size_t>(m.kind)];
      for (const auto & s : propagate(x_init, m.mean, params_, config_.dt)) {
        md.mean_path.push_back({s.X, s.Y});
      }
    }
  }

  result.planned = propagate(x_init, result.sequence, params_, config_.dt);
  result.command = result.sequence.front();
  prior_ = result.sequence;
  diag.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t_start).count();
  return result;
}

}  // namespace mmppi
