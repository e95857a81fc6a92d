#pragma once

#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "mmppi/cost.hpp"
#include "mmppi/vehicle_dynamics.hpp"
#include "mmppi/world.hpp"

namespace mmppi {

/// Horizon of control rates, one entry per planning step.
using ControlSequence = std::vector<ControlRates>;

/// Hard actuator capabilities used to build mode means and clip samples.
struct ActuatorLimits
{
  double ddelta_max = 0.8;    // rad/s
  double jx_max = 40.0;       // m/s^3
  double delta_max = 0.45;    // rad
  double ax_max = 9.5;        // m/s^2
  double a_engine_max = 4.0;  // m/s^2, drivetrain limit for acceleration
};

enum class ModeKind { Prior = 0, MaxBrake = 1, MaxAccel = 2, Evasive = 3 };

inline constexpr std::size_t kModeCount = 4;

std::string_view to_string(ModeKind kind);

struct Mode
{
  ModeKind kind = ModeKind::Prior;
  ControlSequence mean;
  std::size_t sample_count = 0;
  CostProfile cost_profile;
  /// +1 left, -1 right; only meaningful for Evasive.
  int side = 0;
};

struct TcpaEntry
{
  double tcpa = 0.0;   // s, clamped at 0
  double d_cpa = 0.0;  // m
  bool approaching = false;
};

struct TcpaReport
{
  std::vector<TcpaEntry> entries;  // one per visible obstacle, same order
  double min_tcpa = std::numeric_limits<double>::infinity();
  /// Index of the approaching obstacle with the smallest TCPA, or -1.
  int most_imminent = -1;
};

/// Closest point of approach between the ego CoG and an obstacle moving at
/// constant velocity. Returns {tcpa, d_cpa}.
std::pair<double, double> tcpa(const VehicleState & ego, const Obstacle & obstacle);

/// TCPA of every visible obstacle. Only approaching obstacles count towards
/// min_tcpa; a receding obstacle has tcpa 0 but cannot open the gate.
TcpaReport tcpa_report(const VehicleState & ego, const std::vector<Obstacle> & obstacles);

/// Drop the first element and duplicate the last.
ControlSequence shift_prior(const ControlSequence & prev);

/// Everything build_mode_means needs besides the prior and the state.
struct ModeContext
{
  const WorldSnapshot & world;
  const VehicleParams & params;
  const CostWeights & weights;
  const EgoFootprint & footprint;
  const ActuatorLimits & limits;
  double dt = 0.05;
  double gate_tcpa = 2.0;
  /// Standard single-mode MPPI: never open the gate.
  bool prior_only = false;
};

/// Clip the rates of `seq` so that integrating them from `state` keeps
/// |delta| <= delta_max and |ax| <= ax_max.
ControlSequence make_admissible(const ControlSequence & seq, const VehicleState & state, const ActuatorLimits & limits, double dt);

/// Mean sequences of the analytical modes, built by rolling simple feedback
/// policies through the prediction model.
ControlSequence max_brake_mean(const VehicleState & state, const ModeContext & ctx, std::size_t horizon);
ControlSequence max_accel_mean(const VehicleState & state, const ModeContext & ctx, std::size_t horizon);
ControlSequence evasive_mean(const VehicleState & state, const ModeContext & ctx, const TcpaReport & report, std::size_t horizon, int * side_out = nullptr);

/// Side (+1 left, -1 right) with the larger lateral clearance between the
/// obstacle and the road edges. Ties go left.
int evasive_side(const Obstacle & obstacle, const RoadEdges & edges);

/// Prior only while min_tcpa >= gate; all four modes below it.
std::vector<Mode> build_mode_means(
  const ControlSequence & prior, const VehicleState & state, const TcpaReport & report, const ModeContext & ctx);

/// Fill sample_count: the sole mode takes all K; otherwise each analytical
/// mode gets round(0.2 K) and the prior the remainder.
void allocate_samples(std::size_t K, std::vector<Mode> & modes);

}  // namespace mmppi
