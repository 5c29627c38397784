#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "psm/core/errors.hpp"
#include "psm/core/scenario_io.hpp"
#include "psm/solver/record.hpp"

namespace psm::solver {

SimulationRecord run_experiment(const TransportSolver& solver, const InputTrajectory& trajectory,
                                const FieldState& initial, std::size_t n_steps) {
  const auto& cfg = solver.config();
  SimulationRecord rec;
  rec.scenario_hash = scenario_hash(cfg);
  rec.delta_t = cfg.delta_t;
  rec.grid_z = solver.grid().centers;
  rec.stations = cfg.sensor_stations;
  FieldState s = initial;
  for (std::size_t k = 0;; ++k) {
    const double t = cfg.delta_t * static_cast<double>(k);
    const std::vector<double> v = trajectory.at(t);
    rec.times.push_back(t);
    rec.controls.push_back(v);
    rec.sensors.push_back(solver.sensors(s));
    rec.states.push_back(s);
    if (k == n_steps) break;
    s = solver.step(s, v);
  }
  return rec;
}

SimulationRecord run_experiment(const TransportSolver& solver, const InputTrajectory& trajectory) {
  const auto& cfg = solver.config();
  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.episode_duration / cfg.delta_t));
  return run_experiment(solver, trajectory, solver.steady_state(trajectory.at(0.0)), n_steps);
}

std::vector<SimulationRecord> run_corpus(const TransportSolver& solver,
                                         const std::vector<InputTrajectory>& trajectories,
                                         unsigned workers) {
  std::vector<SimulationRecord> out(trajectories.size());
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(trajectories.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    // step() keeps per-call audit counters, so each worker owns a copy.
    const TransportSolver local = solver;
    for (std::size_t e = next++; e < trajectories.size(); e = next++) {
      try {
        out[e] = run_experiment(local, trajectories[e]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace psm::solver
