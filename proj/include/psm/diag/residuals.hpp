#pragma once

#include <vector>

#include "psm/core/matrix.hpp"
#include "psm/train/dataset.hpp"
#include "psm/train/model.hpp"
#include "psm/train/physics.hpp"

namespace psm::diag {

struct ResidualCurves {
  std::vector<double> z;
  std::vector<double> mass;
  std::vector<double> momentum;
  std::vector<double> energy;
};

/// Distinct (v, x0) conditions of the t = delta_t rows, at most `max_count`,
/// evenly strided over the dataset.
Matrix conditions_from(const train::Dataset& data, std::size_t max_count);

/// Nondimensional residuals at every z, evaluated at t = delta_t / 2 and averaged
/// over the conditions. `ctx` fixes the physics (normally the nominal scenario).
ResidualCurves pde_residuals(const train::Model& model, const train::PhysicsContext& ctx,
                             const Matrix& conditions, const std::vector<double>& z);

}  // namespace psm::diag
