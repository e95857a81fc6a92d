#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mmppi/cost.hpp"
#include "mmppi/multimodal.hpp"
#include "mmppi/solver.hpp"
#include "mmppi/vehicle_dynamics.hpp"
#include "mmppi/world.hpp"

namespace mmppi {

inline constexpr double kPlantDt = 0.001;

/// Plant-side model: perturbed parameters plus second-order actuators.
struct PlantConfig
{
  VehicleParams params;
  ActuatorLimits limits;
  double steer_wn = 25.0;   // rad/s
  double steer_zeta = 0.7;
  double accel_wn = 8.0;    // rad/s
  double accel_zeta = 0.7;
  /// Feed the command rates straight into the model integrators.
  bool bypass_actuators = false;
};

/// Vehicle state plus actuator internals. vehicle.delta and vehicle.ax are
/// the actuator outputs; *_ref are the integrated commands they follow.
struct PlantState
{
  VehicleState vehicle;
  double steer_rate = 0.0;
  double accel_rate = 0.0;
  double delta_ref = 0.0;
  double ax_ref = 0.0;
};

/// One plant tick with the command held constant.
PlantState plant_step(const PlantState & plant, const ControlRates & command, const PlantConfig & cfg, double dt = kPlantDt);

enum class RevealRule { Always, Ttc, Occluded };

struct VelocitySegment
{
  double t_start = 0.0;
  Vec2 velocity;
};

/// Scripted obstacle: piecewise-constant velocity from an initial position.
struct ObstacleScript
{
  Vec2 start;
  double radius = 1.0;
  std::vector<VelocitySegment> segments;
  RevealRule reveal = RevealRule::Ttc;
  /// Obstacles sharing a non-negative group are revealed together.
  int group = -1;

  Vec2 position_at(double t) const;
  Vec2 velocity_at(double t) const;
};

struct Occluder
{
  std::vector<Vec2> polygon;
};

/// True if the segment a-b touches the polygon (crossing or contained).
bool segment_hits_polygon(Vec2 a, Vec2 b, const std::vector<Vec2> & polygon);

struct ScenarioConfig
{
  std::string name = "scenario";
  VehicleParams vehicle;   // planner model (mu = planner belief)
  ActuatorLimits limits;
  EgoFootprint footprint;
  CostWeights weights;
  SolverConfig solver;
  RoadEdges road;
  double lane_width = 3.5;
  std::shared_ptr<const PathReference> path;
  double mu_plant = 1.0;
  double v0 = 20.0;
  double trigger_ttc = 2.0;
  std::vector<ObstacleScript> obstacles;
  std::vector<Occluder> occluders;
  double calpha_factor = 0.9;
  double mu_factor = 0.95;
  double mass_factor = 1.05;
  double steer_wn = 25.0;
  double steer_zeta = 0.7;
  double accel_wn = 8.0;
  double accel_zeta = 0.7;
  bool bypass_actuators = false;
  double t_max = 12.0;
  /// Path progress at which the run counts as completed; <= 0 = path end - 5 m.
  double finish_s = 0.0;
  std::uint64_t seed = 0;

  PlantConfig plant_config() const;
};

/// Throws ConfigError if the scenario is inconsistent.
void validate(const ScenarioConfig & cfg);

/// Tracks which scripted obstacles the planner may see. Visibility is
/// latched: once revealed an obstacle stays visible.
class ObstacleRevealer
{
public:
  explicit ObstacleRevealer(const ScenarioConfig & cfg);

  /// Update visibility for time t; returns indices revealed by this call.
  std::vector<std::size_t> update(double t, const PlantState & plant);

  /// Visible obstacles at time t as the planner sees them.
  WorldSnapshot snapshot(double t) const;

  bool visible(std::size_t i) const {return visible_[i];}
  std::size_t visible_count() const;

private:
  const ScenarioConfig & cfg_;
  std::vector<bool> visible_;
};

/// Convenience wrapper: update + snapshot.
WorldSnapshot reveal_obstacles(double t, const PlantState & plant, ObstacleRevealer & revealer);

enum class RunStatus { Completed, Collided, DepartedRoad, StoppedSafe, Timeout };

std::string_view to_string(RunStatus status);

struct TraceRow
{
  double t, X, Y, psi, vx, vy, r, delta, ax, min_obstacle_distance;
};

struct PlanRecord
{
  double t = 0.0;
  VehicleState x_init;
  ControlRates command;
  SolverDiagnostics diag;
  std::vector<VehicleState> planned;
  std::size_t visible_obstacles = 0;
};

struct SimEvent
{
  double t = 0.0;
  std::string kind;  // "reveal", "collision", "road_departure", "degraded"
  int obstacle = -1;
};

struct SimLog
{
  std::string scenario;
  std::string mode;
  std::uint64_t seed = 0;
  std::vector<TraceRow> trace;
  std::vector<PlanRecord> plans;
  std::vector<SimEvent> events;
  RunStatus status = RunStatus::Timeout;
  double t_end = 0.0;

  /// Time of the first reveal event, or a negative value.
  double first_reveal_time() const;
};

/// Closed loop: re-plan every solver dt, hold the command for the plant
/// ticks in between, stop on the first terminal condition.
SimLog run_scenario(const ScenarioConfig & cfg, const SolverConfig & solver, const CostWeights & weights);

/// The standard MPPI variant of a solver configuration.
SolverConfig baseline_mode(SolverConfig cfg);

/// Initial plant state: on the path start, aligned, at v0.
PlantState initial_plant_state(const ScenarioConfig & cfg);

}  // namespace mmppi
