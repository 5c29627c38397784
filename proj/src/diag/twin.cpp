#include "psm/diag/twin.hpp"

#include <string>

#include "psm/core/errors.hpp"

namespace psm::diag {

TwinResult transfer_learn_twin(const train::Model& nominal, const train::Dataset& data,
                               const TwinConfig& cfg) {
  TwinResult res;
  if (data.size() == 0) {
    res.params = nominal.params;
    return res;
  }
  train::TrainConfig tc;
  tc.alpha = 1.0;
  tc.beta = 0.0;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.seed = cfg.seed;
  tc.adam = cfg.adam;
  tc.adam.lr0 = cfg.adam.lr0 * cfg.lr_factor;
  // Physics is never evaluated with beta = 0, so an empty context is enough.
  train::PhysicsContext ctx{{}, nominal.scaling, data.layout, {}};
  double first = 0.0;
  auto r = train::train(nominal.mlp, nominal.params, data, ctx, tc, {},
                        [&](const train::EpochMetrics& m) {
                          if (m.epoch == 1) first = m.measurement;
                          if (m.epoch > 1 && m.measurement > 10.0 * first) {
                            throw NumericalError("twin: loss diverged at epoch " + std::to_string(m.epoch));
                          }
                        });
  res.params = std::move(r.params);
  res.history = std::move(r.history);
  return res;
}

double measurement_mse(const train::Model& model, const train::Dataset& data) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data.is_initial[i]) rows.push_back(i);
  }
  if (rows.empty()) return 0.0;
  const Matrix y = model.mlp.forward(model.params, train::gather_rows(data.inputs, rows));
  double s = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double e = y(i, c) - data.targets(rows[i], c);
      s += e * e;
    }
  }
  return s / static_cast<double>(3 * rows.size());
}

}  // namespace psm::diag
