#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mmppi/cost.hpp"
#include "mmppi/multimodal.hpp"
#include "mmppi/quasi_random.hpp"
#include "mmppi/vehicle_dynamics.hpp"
#include "mmppi/worker_pool.hpp"
#include "mmppi/world.hpp"

namespace mmppi {

struct SolverConfig
{
  std::size_t K = 2600;
  std::size_t T = 50;
  double dt = 0.05;
  double lambda = 10.0;
  PerturbationScale scale;
  /// 0 = one worker per hardware thread.
  std::size_t worker_count = 0;
  double gate_tcpa = 2.0;
  /// Standard MPPI baseline: sample around the shifted prior only.
  bool prior_only = false;
  /// Add the likelihood-ratio term lambda * mean' Sigma^-1 eps to each cost.
  bool importance_correction = false;
  /// Weight rollouts with their mode's customised cost instead of the
  /// nominal one.
  bool mode_costs_in_update = false;
  /// Digital-shift seed for the Sobol stream; empty = plain sequence.
  std::optional<std::uint64_t> sobol_seed;
  /// Keep every rollout's state trajectory in the batch.
  bool keep_trajectories = false;
};

/// Throws ConfigError when a field is out of range.
void validate(const SolverConfig & cfg);

/// K sampled control sequences with their outcomes. Row k of the control
/// and trajectory arrays belongs to rollout k.
struct RolloutBatch
{
  std::size_t K = 0;
  std::size_t T = 0;
  std::vector<ControlRates> controls;      // K x T
  std::vector<VehicleState> trajectories;  // K x (T + 1) when kept
  std::vector<double> costs;               // nominal weights
  std::vector<double> profile_costs;       // mode-customised weights
  std::vector<double> velocity_terms;      // weighted sum of velocity cost
  std::vector<double> stop_terms;          // weighted sum of stop cost
  std::vector<ModeKind> modes;
  std::vector<std::uint8_t> non_finite;

  void resize(std::size_t k, std::size_t t, bool keep_trajectories);

  std::span<const ControlRates> control(std::size_t k) const {return {controls.data() + k * T, T};}
  std::span<ControlRates> control(std::size_t k) {return {controls.data() + k * T, T};}
};

struct WeightResult
{
  std::vector<double> weights;
  double rho = 0.0;
  double eta = 0.0;
};

/// Exponentiated-cost weights shifted by the minimum cost:
/// w_k = exp(-(S_k - rho) / lambda) / eta.
WeightResult compute_weights(std::span<const double> costs, double lambda);

/// Weighted average of the batch controls, summed in rollout order.
ControlSequence weighted_update(const RolloutBatch & batch, std::span<const double> weights);

/// Everything needed to evaluate rollouts for one plan step.
struct RolloutContext
{
  const WorldSnapshot & world;
  const VehicleParams & params;
  const CostWeights & weights;
  const EgoFootprint & footprint;
  double dt = 0.05;
};

/// Total nominal cost of one control sequence from x_init. Optionally stores
/// the T + 1 states in `trajectory`.
double rollout_cost(
  const VehicleState & x_init, std::span<const ControlRates> controls,
  const RolloutContext & ctx, VehicleState * trajectory = nullptr);

/// Propagates and costs every rollout of the batch (in parallel when a pool
/// is given). Non-finite rollouts are capped at 10x the largest finite cost
/// and flagged. Returns the number of flagged rollouts.
std::size_t propagate_rollouts(
  const VehicleState & x_init, RolloutBatch & batch, const std::vector<CostProfile> & profiles,
  const RolloutContext & ctx, WorkerPool * pool);

/// Propagate a sequence through the prediction model; T + 1 states.
std::vector<VehicleState> propagate(
  const VehicleState & x_init, std::span<const ControlRates> controls, const VehicleParams & params, double dt);

struct ModeDiagnostics
{
  std::size_t samples = 0;
  double weight_mass = 0.0;
  double best_cost = 0.0;
  double best_profile_cost = 0.0;
  std::vector<Vec2> mean_path;  // propagated mode mean (X, Y)
};

struct SolverDiagnostics
{
  double rho = 0.0;
  double eta = 0.0;
  double effective_sample_size = 0.0;
  std::size_t active_modes = 1;
  std::array<ModeDiagnostics, kModeCount> modes{};
  TcpaReport tcpa;
  int evasive_side = 0;
  std::size_t non_finite = 0;
  bool degraded = false;
  double wall_ms = 0.0;
  double rollout_ms = 0.0;

  double mass(ModeKind kind) const {return modes[static_cast<std::size_t>(kind)].weight_mass;}
};

struct PlanResult
{
  ControlRates command;
  ControlSequence sequence;
  std::vector<VehicleState> planned;  // sequence propagated from x_init
  SolverDiagnostics diag;
};

/// Receding-horizon multi-modal MPPI planner. Owns the previous solution and
/// the Sobol stream; not shareable between threads.
class Planner
{
public:
  Planner(
    SolverConfig config, VehicleParams params, CostWeights weights, ActuatorLimits limits,
    EgoFootprint footprint);

  /// One full sample-propagate-weight-update cycle from x_init.
  PlanResult plan_step(const VehicleState & x_init, const WorldSnapshot & world);

  const SolverConfig & config() const {return config_;}
  const ControlSequence & prior() const {return prior_;}
  void set_prior(ControlSequence prior) {prior_ = std::move(prior);}
  const RolloutBatch & last_batch() const {return batch_;}
  std::size_t worker_count() const {return pool_->size();}

private:
  SolverConfig config_;
  VehicleParams params_;
  CostWeights weights_;
  ActuatorLimits limits_;
  EgoFootprint footprint_;
  ControlSequence prior_;
  SobolStream stream_;
  std::unique_ptr<WorkerPool> pool_;
  RolloutBatch batch_;
};

}  // namespace mmppi
