#include "psm/core/grid.hpp"

#include <algorithm>
#include <string>

#include "psm/core/errors.hpp"
#include "psm/core/field_state.hpp"

namespace psm {

Grid build_grid(const ScenarioConfig& config) {
  if (config.segments.empty()) throw ConfigError("grid: scenario has no segments");
  Grid g;
  g.faces.push_back(0.0);
  double offset = 0.0;
  for (std::size_t s = 0; s < config.segments.size(); ++s) {
    const auto& seg = config.segments[s];
    if (!(seg.length > 0.0)) {
      throw ConfigError("grid: segment " + std::to_string(s) + " has non-positive length");
    }
    if (seg.n_elements < 1) {
      throw ConfigError("grid: segment " + std::to_string(s) + " needs at least one element");
    }
    const double h = seg.length / seg.n_elements;
    for (int i = 0; i < seg.n_elements; ++i) {
      // Positions from the segment origin keep the last face exactly at offset + length.
      const double left = offset + h * i;
      const double right = (i + 1 == seg.n_elements) ? offset + seg.length : offset + h * (i + 1);
      g.centers.push_back(0.5 * (left + right));
      g.dz.push_back(right - left);
      g.faces.push_back(right);
      g.segment_of_cell.push_back(s);
    }
    offset += seg.length;
  }
  return g;
}

double interpolate_centers(const Grid& grid, const std::vector<double>& values, double z) {
  const auto& c = grid.centers;
  if (values.size() != c.size()) throw ConfigError("interpolate: size mismatch");
  if (c.size() == 1 || z <= c.front()) return values.front();
  if (z >= c.back()) return values.back();
  const auto it = std::upper_bound(c.begin(), c.end(), z);
  const std::size_t j = static_cast<std::size_t>(it - c.begin());
  const double w = (z - c[j - 1]) / (c[j] - c[j - 1]);
  return (1.0 - w) * values[j - 1] + w * values[j];
}

void validate(const FieldState& state) {
  const std::size_t n = state.z.size();
  if (state.p.size() != n || state.u.size() != n || state.T.size() != n) {
    throw ConfigError("field state: arrays differ in length");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(state.z[i] > state.z[i - 1])) throw ConfigError("field state: z not strictly increasing");
  }
}

}  // namespace psm
