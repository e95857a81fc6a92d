#pragma once

#include <filesystem>
#include <string>

#include "mmppi/sim.hpp"

namespace mmppi {

inline constexpr int kScenarioSchemaVersion = 1;

/// Parse a JSON scenario document. Errors carry the offending field and,
/// where it can be located, the 1-based line in `text`.
ScenarioConfig parse_scenario(const std::string & text);

ScenarioConfig load_scenario(const std::filesystem::path & file);

}  // namespace mmppi
