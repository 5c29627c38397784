#pragma once

#include <vector>

#include "psm/core/scenario.hpp"
#include "psm/solver/record.hpp"
#include "psm/train/dataset.hpp"
#include "psm/train/model.hpp"

namespace psm::testing {

// Heated channel with a 30 s episode, enough for a handful of transitions.
inline ScenarioConfig short_channel() {
  auto c = heated_channel_preset();
  c.episode_duration = 30.0;
  return c;
}

inline std::vector<solver::SimulationRecord> short_records(const ScenarioConfig& c, std::size_t n,
                                                           std::uint64_t seed = 3) {
  solver::TransportSolver s(c);
  return solver::run_corpus(s, solver::generate_trajectories(seed, c, n), 1);
}

// Untrained network wrapped as a model, with scaling from `records`.
inline train::Model tiny_model(const ScenarioConfig& c, const std::vector<solver::SimulationRecord>& records,
                               std::uint64_t seed = 5) {
  const auto scaling = train::compute_scaling(records, c);
  train::InputLayout layout{c.n_controls(), c.n_stations()};
  nn::MlpSpec spec;
  spec.input_dim = layout.input_dim();
  spec.head_width = 12;
  spec.head_depth = 2;
  spec.inter_width = 8;
  spec.tail_width = 6;
  nn::Mlp mlp(spec);
  auto params = mlp.init_params(seed);
  return train::Model{std::move(mlp), std::move(params), scaling, layout, c.sensor_stations, c.delta_t};
}

}  // namespace psm::testing
