#include "psm/train/rollout.hpp"

#include <algorithm>
#include <cmath>

#include "psm/core/errors.hpp"

namespace psm::train {

namespace {

Matrix build_inputs(const ScalingSpec& sc, const InputLayout& layout, const std::vector<double>& zs,
                    double t, const std::vector<double>& v, const std::vector<double>& x0) {
  Matrix x(zs.size(), layout.input_dim());
  const auto row = make_input(sc, layout, 0.0, t, v, x0);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    std::copy(row.begin(), row.end(), x.row(i).begin());
    x(i, InputLayout::z_col) = zs[i] / sc.z_max;
  }
  return x;
}

}  // namespace

std::vector<double> predict_sensors(const nn::Mlp& mlp, const std::vector<double>& params,
                                    const ScalingSpec& sc, const InputLayout& layout,
                                    const std::vector<double>& stations,
                                    const std::vector<double>& x0, const std::vector<double>& v,
                                    double t) {
  const Matrix y = mlp.forward(params, build_inputs(sc, layout, stations, t, v, x0));
  std::vector<double> out(3 * stations.size());
  for (std::size_t j = 0; j < stations.size(); ++j) {
    for (int c = 0; c < 3; ++c) out[3 * j + c] = sc.field(c).unscale(y(j, c));
  }
  return out;
}

RolloutResult rollout_evaluate(const nn::Mlp& mlp, const std::vector<double>& params,
                               const ScalingSpec& sc, const InputLayout& layout,
                               const solver::SimulationRecord& rec, bool oracle_fed) {
  if (rec.n_times() < 2) throw ConfigError("rollout: record needs at least two snapshots");
  if (rec.stations.size() != layout.n_stations) throw ConfigError("rollout: station count mismatch");
  RolloutResult res;
  res.z = rec.grid_z;
  const std::size_t n = rec.grid_z.size();
  res.sq_error_by_z.assign(3, std::vector<double>(n, 0.0));
  std::vector<double> x0 = rec.sensors.front();
  double sq[3] = {0.0, 0.0, 0.0};
  const std::size_t steps = rec.n_times() - 1;
  for (std::size_t k = 0; k < steps; ++k) {
    const Matrix y = mlp.forward(params, build_inputs(sc, layout, rec.grid_z, rec.delta_t,
                                                      rec.controls[k], x0));
    FieldState pred;
    pred.z = rec.grid_z;
    pred.p.resize(n);
    pred.u.resize(n);
    pred.T.resize(n);
    std::vector<double>* f[3] = {&pred.p, &pred.u, &pred.T};
    const auto& truth = rec.states[k + 1];
    const std::vector<double>* t[3] = {&truth.p, &truth.u, &truth.T};
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) {
        (*f[c])[i] = sc.field(c).unscale(y(i, c));
        const double e = (*f[c])[i] - (*t[c])[i];
        sq[c] += e * e;
        res.sq_error_by_z[c][i] += e * e / static_cast<double>(steps);
      }
    }
    res.predictions.push_back(pred);
    x0 = oracle_fed ? rec.sensors[k + 1]
                    : predict_sensors(mlp, params, sc, layout, rec.stations, x0, rec.controls[k],
                                      rec.delta_t);
  }
  for (int c = 0; c < 3; ++c) res.rmse[c] = std::sqrt(sq[c] / static_cast<double>(steps * n));
  return res;
}

RmseRow mean_rmse(const std::vector<RolloutResult>& results) {
  RmseRow row{"mean", {0.0, 0.0, 0.0}};
  for (const auto& r : results) {
    for (int c = 0; c < 3; ++c) row.values[c] += r.rmse[c] / static_cast<double>(results.size());
  }
  return row;
}

RmseRow max_rmse(const std::vector<RolloutResult>& results) {
  RmseRow row{"max", {0.0, 0.0, 0.0}};
  for (const auto& r : results) {
    for (int c = 0; c < 3; ++c) row.values[c] = std::max(row.values[c], r.rmse[c]);
  }
  return row;
}

}  // namespace psm::train
