#pragma once

#include <string>
#include <vector>

#include "psm/core/scaling.hpp"
#include "psm/nn/mlp.hpp"
#include "psm/solver/record.hpp"
#include "psm/train/dataset.hpp"

namespace psm::train {

struct RolloutResult {
  double rmse[3] = {0.0, 0.0, 0.0};  // p [Pa], u [m/s], T [K] over space-time
  std::vector<double> z;
  std::vector<std::vector<double>> sq_error_by_z;  // [field][cell], mean over steps
  std::vector<FieldState> predictions;     // one per predicted step (k = 1..n-1)
};

/// Closed-loop rollout along a recorded control sequence. Starting from the
/// record's first sensor snapshot, the model predicts the full field at t = delta_t
/// on the record grid; its values at the sensor stations become the next x0. With
/// `oracle_fed` the next x0 is taken from the record instead.
RolloutResult rollout_evaluate(const nn::Mlp& mlp, const std::vector<double>& params,
                               const ScalingSpec& scaling, const InputLayout& layout,
                               const solver::SimulationRecord& record, bool oracle_fed = false);

/// One-step prediction of sensor values (physical units) from (x0, v).
std::vector<double> predict_sensors(const nn::Mlp& mlp, const std::vector<double>& params,
                                    const ScalingSpec& scaling, const InputLayout& layout,
                                    const std::vector<double>& stations,
                                    const std::vector<double>& x0, const std::vector<double>& v,
                                    double t);

struct RmseRow {
  std::string label;
  double values[3] = {0.0, 0.0, 0.0};
};

/// Mean and maximum RMSE per field over a set of rollouts.
RmseRow mean_rmse(const std::vector<RolloutResult>& results);
RmseRow max_rmse(const std::vector<RolloutResult>& results);

}  // namespace psm::train
