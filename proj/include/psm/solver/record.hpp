#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "psm/core/field_state.hpp"
#include "psm/core/scenario.hpp"
#include "psm/solver/trajectory.hpp"
#include "psm/solver/transport_solver.hpp"

namespace psm::solver {

/// One experiment sampled every delta_t.
struct SimulationRecord {
  std::uint64_t scenario_hash = 0;
  double delta_t = 0.0;
  std::vector<double> grid_z;
  std::vector<double> stations;
  std::vector<double> times;
  std::vector<std::vector<double>> controls;  // v_k per time
  std::vector<FieldState> states;
  std::vector<std::vector<double>> sensors;   // station-major [p, u, T]

  std::size_t n_times() const { return times.size(); }
};

/// Starts from `initial`, records it, then applies v_k = trajectory(t_k) over
/// [t_k, t_k + delta_t) for each step (zero-order hold at the measurement cadence).
SimulationRecord run_experiment(const TransportSolver& solver, const InputTrajectory& trajectory,
                                const FieldState& initial, std::size_t n_steps);

/// Convenience: n_steps = episode_duration / delta_t, initial = steady state at trajectory(0).
SimulationRecord run_experiment(const TransportSolver& solver, const InputTrajectory& trajectory);

/// Binary format "PSMD" v1; see docs/formats.md.
void write_record(const SimulationRecord& record, const std::filesystem::path& path);
SimulationRecord read_record(const std::filesystem::path& path);
/// Long-format CSV with columns time,z,p,u,T,v0..v{p-1}.
void write_record_csv(const SimulationRecord& record, const std::filesystem::path& path);

/// Runs independent experiments, optionally on several worker threads.
std::vector<SimulationRecord> run_corpus(const TransportSolver& solver,
                                         const std::vector<InputTrajectory>& trajectories,
                                         unsigned workers);

}  // namespace psm::solver
