#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "psm/core/matrix.hpp"
#include "psm/core/scaling.hpp"
#include "psm/nn/mlp.hpp"
#include "psm/train/dataset.hpp"

namespace psm::train {

/// A trained network together with everything needed to run it as a discrete
/// state-space model: scaling, input layout, sensor stations and step length.
struct Model {
  nn::Mlp mlp;
  std::vector<double> params;
  ScalingSpec scaling;
  InputLayout layout;
  std::vector<double> stations;
  double delta_t = 0.0;

  /// x_{k+1} at the sensor stations from (x0, v), all in scaled units.
  std::vector<double> step_scaled(std::span<const double> x0, std::span<const double> v) const;

  /// Same map in physical units.
  std::vector<double> step(std::span<const double> x0, std::span<const double> v) const;

  /// Scaled inputs for evaluating the network at positions `z` (m) and time `t` (s).
  Matrix inputs_at(std::span<const double> z, double t, std::span<const double> x0_scaled,
                   std::span<const double> v_scaled) const;
};

/// Value and Jacobians of the scaled one-step map. Rows follow the station-major
/// state vector; A is q x q (d x1 / d x0) and B is q x p (d x1 / d v).
struct StepJacobian {
  std::vector<double> value;
  Matrix a;
  Matrix b;
};

StepJacobian step_jacobian(const Model& model, std::span<const double> x0_scaled,
                           std::span<const double> v_scaled);

/// Writes `<stem>.psmw` (weights) and `<stem>.json` (scaling, layout, stations).
void save_model(const Model& model, const std::filesystem::path& stem);
/// Accepts either path of the pair or the bare stem.
Model load_model(const std::filesystem::path& path);

}  // namespace psm::train
