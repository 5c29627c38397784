#include "psm/train/dataset.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "psm/core/errors.hpp"

namespace psm::train {

ScalingSpec compute_scaling(const std::vector<solver::SimulationRecord>& records,
                            const ScenarioConfig& scenario, double margin) {
  if (records.empty()) throw ConfigError("scaling: no records");
  constexpr double inf = std::numeric_limits<double>::infinity();
  double lo[3] = {inf, inf, inf}, hi[3] = {-inf, -inf, -inf};
  for (const auto& rec : records) {
    for (const auto& s : rec.states) {
      const std::vector<double>* f[3] = {&s.p, &s.u, &s.T};
      for (int c = 0; c < 3; ++c) {
        const auto [mn, mx] = std::minmax_element(f[c]->begin(), f[c]->end());
        lo[c] = std::min(lo[c], *mn);
        hi[c] = std::max(hi[c], *mx);
      }
    }
  }
  ScalingSpec spec;
  spec.z_max = scenario.total_length();
  spec.t_max = scenario.delta_t;
  spec.p = with_margin(lo[0], hi[0], margin);
  spec.u = with_margin(lo[1], hi[1], margin);
  spec.T = with_margin(lo[2], hi[2], margin);
  spec.rho = {density(scenario.fluid, spec.T.max), density(scenario.fluid, spec.T.min)};
  for (const auto& ch : scenario.controls) spec.controls.push_back({ch.min, ch.max});
  spec.validate();
  return spec;
}

std::vector<double> make_input(const ScalingSpec& scaling, const InputLayout& layout, double z,
                               double t, std::span<const double> v, std::span<const double> x0) {
  if (v.size() != layout.n_controls || x0.size() != layout.x0_size()) {
    throw ConfigError("dataset: input row dimensions do not match the layout");
  }
  std::vector<double> row(layout.input_dim());
  row[InputLayout::z_col] = z / scaling.z_max;
  row[InputLayout::t_col] = t / scaling.t_max;
  const auto vs = scale_controls(scaling, v);
  std::copy(vs.begin(), vs.end(), row.begin() + static_cast<std::ptrdiff_t>(layout.v_col()));
  const auto xs = scale_sensors(scaling, x0);
  std::copy(xs.begin(), xs.end(), row.begin() + static_cast<std::ptrdiff_t>(layout.x0_col()));
  return row;
}

Dataset assemble_dataset(const std::vector<solver::SimulationRecord>& records,
                         const ScenarioConfig& scenario, const ScalingSpec& scaling) {
  scaling.validate();
  Dataset ds;
  ds.layout.n_controls = scenario.n_controls();
  ds.layout.n_stations = scenario.n_stations();
  const std::size_t q = scenario.n_stations();
  std::size_t rows = 0;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.n_times() < 2) {
      throw ConfigError("dataset: record " + std::to_string(r) + " has fewer than 2 snapshots");
    }
    if (rec.stations != scenario.sensor_stations || rec.delta_t != scenario.delta_t) {
      throw ConfigError("dataset: record " + std::to_string(r) + " does not match the scenario");
    }
    rows += (rec.n_times() - 1) * q * 2;
  }
  ds.inputs.resize(rows, ds.layout.input_dim());
  ds.targets.resize(rows, 3);
  std::size_t row = 0;
  auto emit = [&](std::size_t r, std::size_t k, std::size_t j, double t, const std::vector<double>& target) {
    const auto& rec = records[r];
    const auto in = make_input(scaling, ds.layout, scenario.sensor_stations[j], t, rec.controls[k],
                               rec.sensors[k]);
    std::copy(in.begin(), in.end(), ds.inputs.row(row).begin());
    for (int c = 0; c < 3; ++c) ds.targets(row, c) = scaling.field(c).scale(target[3 * j + c]);
    ds.record_of_row.push_back(r);
    ds.step_of_row.push_back(k);
    ds.station_of_row.push_back(j);
    ds.is_initial.push_back(t == 0.0 ? 1 : 0);
    ++row;
  };
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    for (std::size_t k = 0; k + 1 < rec.n_times(); ++k) {
      for (std::size_t j = 0; j < q; ++j) emit(r, k, j, 0.0, rec.sensors[k]);
      for (std::size_t j = 0; j < q; ++j) emit(r, k, j, scenario.delta_t, rec.sensors[k + 1]);
    }
  }
  return ds;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> index) {
  Matrix out(index.size(), m.cols);
  for (std::size_t i = 0; i < index.size(); ++i) {
    std::copy_n(m.ptr() + index[i] * m.cols, m.cols, out.ptr() + i * m.cols);
  }
  return out;
}

}  // namespace psm::train
