#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psm/solver/trajectory.hpp"
#include "psm/solver/transport_solver.hpp"
#include "psm/train/model.hpp"

namespace psm::control {

struct CgConfig {
  Eigen::MatrixXd q;  // empty means identity
  int horizon = 50;
  double epsilon = 0.01;
  int gamma = 10;
  double qp_tolerance = 1e-9;
  long max_sweeps = 100000;
};

/// One control step; inputs and outputs in physical units.
struct NcgStep {
  std::size_t k = 0;
  double t = 0.0;
  std::vector<double> r;
  std::vector<double> v;
  std::string qp_status;
  bool active = false;                  // v differs from r
  std::vector<double> outputs;          // constrained state values at t (measured)
  std::vector<double> bounds;           // bounds in force at t
  double spectral_radius = 0.0;         // of the A matrix in use
};

struct NcgLog {
  std::vector<NcgStep> steps;
  std::size_t linearizations = 0;
  std::size_t rebuilds = 0;
  /// Largest measured excess over the bound in force (<= 0 when never violated).
  double max_violation = 0.0;
};

/// Sequential command governor against the reference solver. The model is
/// re-linearized every gamma steps at (x_k, v_{k-1}); the admissible set is rebuilt
/// then and whenever the look-ahead constraint bounds change. Row k of the set
/// uses the bounds scheduled for t + k delta_t. The episode starts from the steady
/// state at `v_init` (r(0) when absent).
NcgLog ncg_rollout(const train::Model& model, const solver::TransportSolver& env,
                   const solver::InputTrajectory& reference,
                   const std::vector<ConstraintSchedule>& schedules, const CgConfig& config,
                   std::optional<std::vector<double>> v_init = std::nullopt);

/// step, t, r..., v..., qp_status, active, output..., bound...
void write_ncg_csv(const NcgLog& log, const std::filesystem::path& path);

}  // namespace psm::control
