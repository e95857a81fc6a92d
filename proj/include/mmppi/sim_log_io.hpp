#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "mmppi/sim.hpp"

namespace mmppi {

/// `<scenario>_<mode>_s<seed>`; the stem shared by every artifact of a run.
std::string artifact_stem(const std::string & scenario, const std::string & mode, std::uint64_t seed);

/// One JSON object per plan step, then a final summary line. Wall-clock
/// timings are left out so identical runs give identical bytes.
void write_jsonl(std::ostream & out, const SimLog & log);

/// Plant trace with the header t,X,Y,psi,vx,vy,r,delta,ax,min_obstacle_distance.
void write_trace_csv(std::ostream & out, const SimLog & log);

/// Per plan step wall time and rollout time in milliseconds.
void write_timing_csv(std::ostream & out, const SimLog & log);

/// Top-down plot: road edges, obstacles at reveal and at the end, the
/// executed path and the mode mean paths at the first multi-modal step.
void write_svg(std::ostream & out, const SimLog & log, const ScenarioConfig & cfg);

struct RunSummary
{
  RunStatus status = RunStatus::Timeout;
  double min_obstacle_distance = 0.0;
  double max_abs_beta = 0.0;
  double max_abs_r = 0.0;
  double mean_step_ms = 0.0;
  double max_step_ms = 0.0;
};

RunSummary summarize(const SimLog & log);

}  // namespace mmppi
