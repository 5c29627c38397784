#include "psm/diag/residuals.hpp"

#include <set>

namespace psm::diag {

Matrix conditions_from(const train::Dataset& data, std::size_t max_count) {
  // One condition per (record, step): take the first t = delta_t row of each.
  std::vector<std::size_t> rows;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.is_initial[i]) continue;
    if (seen.insert({data.record_of_row[i], data.step_of_row[i]}).second) rows.push_back(i);
  }
  std::vector<std::size_t> pick;
  if (max_count == 0 || rows.size() <= max_count) {
    pick = rows;
  } else {
    for (std::size_t j = 0; j < max_count; ++j) pick.push_back(rows[j * rows.size() / max_count]);
  }
  return train::gather_rows(data.inputs, pick);
}

ResidualCurves pde_residuals(const train::Model& model, const train::PhysicsContext& ctx,
                             const Matrix& conditions, const std::vector<double>& z) {
  ResidualCurves out;
  out.z = z;
  out.mass.assign(z.size(), 0.0);
  out.momentum.assign(z.size(), 0.0);
  out.energy.assign(z.size(), 0.0);
  if (conditions.rows == 0) return out;
  // All z for one condition per block.
  Matrix x(conditions.rows * z.size(), conditions.cols);
  for (std::size_t c = 0; c < conditions.rows; ++c) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      const std::size_t r = c * z.size() + i;
      std::copy_n(conditions.ptr() + c * conditions.cols, conditions.cols, x.ptr() + r * x.cols);
      x(r, train::InputLayout::z_col) = z[i] / model.scaling.z_max;
      x(r, train::InputLayout::t_col) = 0.5;
    }
  }
  const auto res = train::physics_loss(model.mlp, model.params, x, ctx).residuals;
  const double inv = 1.0 / static_cast<double>(conditions.rows);
  for (std::size_t c = 0; c < conditions.rows; ++c) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      const std::size_t r = c * z.size() + i;
      out.mass[i] += res.mass[r] * inv;
      out.momentum[i] += res.momentum[r] * inv;
      out.energy[i] += res.energy[r] * inv;
    }
  }
  return out;
}

}  // namespace psm::diag
