#ifndef PROJDYN_SCENARIO_LOADER_HPP
#define PROJDYN_SCENARIO_LOADER_HPP

#include <filesystem>
#include <string_view>

#include "projdyn/simulation.hpp"

namespace projdyn {

/// Parses a scenario definition (see docs/scenario_format.md). The system may
/// be a catalog name or an inline system definition. Throws InvalidInput.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Parses "auto" | "geometric" | "midpoint" | <positive number>.
MuPolicy parse_mu_policy(std::string_view text);

}  // namespace projdyn

#endif  // PROJDYN_SCENARIO_LOADER_HPP
