#pragma once

#include <filesystem>
#include <string>

#include "psm/core/scaling.hpp"

namespace psm {

/// JSON form: {"z_max", "t_max", "p": [min, max], "u", "T", "rho", "controls": [[min, max], ...]}.
std::string dump_scaling(const ScalingSpec& spec);
ScalingSpec parse_scaling(const std::string& text);

void save_scaling(const ScalingSpec& spec, const std::filesystem::path& path);
ScalingSpec load_scaling(const std::filesystem::path& path);

}  // namespace psm
