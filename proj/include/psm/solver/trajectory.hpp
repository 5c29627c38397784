#pragma once

#include <cstdint>
#include <vector>

#include "psm/core/scenario.hpp"

namespace psm::solver {

/// Piecewise-linear series for one control channel.
struct ChannelSeries {
  std::vector<double> times;   // strictly increasing, starts at 0
  std::vector<double> values;  // channel units (K for temperatures)

  double at(double t) const;  // held constant past the last knot
};

struct InputTrajectory {
  std::vector<ChannelSeries> channels;

  std::vector<double> at(double t) const;
  std::size_t n_channels() const { return channels.size(); }
};

/// Constant inputs for every channel.
InputTrajectory constant_trajectory(const std::vector<double>& v);

/// Alternating random holds and random-rate ramps to random targets, per channel.
/// Experiment e draws from Rng(derive_seed(seed, e)), so results do not depend on
/// how experiments are distributed over workers.
std::vector<InputTrajectory> generate_trajectories(std::uint64_t seed, const ScenarioConfig& config,
                                                   std::size_t n_experiments);
InputTrajectory generate_trajectory(std::uint64_t experiment_seed, const ScenarioConfig& config);

/// Throws ConfigError on non-increasing knots or values outside the channel ranges.
void validate(const InputTrajectory& trajectory, const ScenarioConfig& config);

}  // namespace psm::solver
