#pragma once

#include <filesystem>
#include <string>

#include "psm/core/scenario.hpp"

namespace psm {

/// Scenario configuration files are JSON. Keys and units are documented in
/// docs/formats.md. Temperature-valued entries accept an optional "unit": "C".
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& json_text);
std::string dump_scenario(const ScenarioConfig& config);
void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path);

/// FNV-1a of the canonical JSON dump.
std::uint64_t scenario_hash(const ScenarioConfig& config);

}  // namespace psm
