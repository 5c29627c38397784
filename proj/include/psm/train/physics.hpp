#pragma once

#include <functional>
#include <span>
#include <vector>

#include "psm/core/matrix.hpp"
#include "psm/core/scaling.hpp"
#include "psm/core/scenario.hpp"
#include "psm/nn/mlp.hpp"
#include "psm/train/dataset.hpp"

namespace psm::train {

/// Nondimensional residuals of the mass, momentum and energy equations, one entry
/// per collocation point.
struct PdeResidualSet {
  std::vector<double> mass;
  std::vector<double> momentum;
  std::vector<double> energy;
};

/// Reference scales used to nondimensionalize the residuals:
/// mass by rho_ref / t_max, momentum by rho_ref u_ref / t_max and energy by
/// rho_ref cp T_range / t_max. rho_ref is the mid-range density, u_ref the velocity
/// range and T_range the temperature range of the scaling spec.
struct ResidualScales {
  double mass = 1.0;
  double momentum = 1.0;
  double energy = 1.0;
};

struct PhysicsContext {
  ScenarioConfig scenario;
  ScalingSpec scaling;
  InputLayout layout;
  /// Optional replacement for the scenario's volumetric source q'''(z, v) in W/m^3.
  std::function<double(double z, std::span<const double> v)> source_override;

  ResidualScales scales() const;
  double source(double z, std::span<const double> v) const;
};

struct PhysicsResult {
  double loss = 0.0;
  PdeResidualSet residuals;
};

/// Evaluates the residuals at collocation inputs (scaled rows, t* in [0, 1]). The
/// loss is the mean log-cosh over all points and the three equations. Time and
/// space derivatives come from forward-mode tangents along t* and z*, so the
/// parameter gradient (accumulated into `grad` scaled by `weight` when given)
/// differentiates through them.
PhysicsResult physics_loss(const nn::Mlp& mlp, const std::vector<double>& params,
                           const Matrix& collocation, const PhysicsContext& ctx,
                           std::vector<double>* grad = nullptr, double weight = 1.0);

}  // namespace psm::train
