#pragma once

#include <cstddef>
#include <vector>

#include "psm/core/scenario.hpp"

namespace psm {

/// Staggered 1D grid: scalars (p, T) at cell centers, velocities at faces.
struct Grid {
  std::vector<double> faces;    // n_cells + 1 positions spanning [0, L]
  std::vector<double> centers;  // n_cells positions
  std::vector<double> dz;       // cell widths
  std::vector<std::size_t> segment_of_cell;

  std::size_t n_cells() const { return centers.size(); }
  double length() const { return faces.back(); }
};

Grid build_grid(const ScenarioConfig& config);

/// Linear interpolation of cell-centered values at z (clamped to the end centers).
double interpolate_centers(const Grid& grid, const std::vector<double>& values, double z);

}  // namespace psm
