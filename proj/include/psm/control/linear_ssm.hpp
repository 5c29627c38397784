#pragma once

#include <Eigen/Dense>

#include "psm/train/model.hpp"

namespace psm::control {

/// Jacobian linearization of a trained model in scaled units. The governor uses
/// the incremental form x_{k+1} ~ x00 + A (x_k - x00) + B (v_k - v00); f0 = F(x00, v00)
/// is kept for the first-order Taylor map. Full-state feedback, so the
/// constrained outputs are the states themselves.
struct LinearSSM {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::VectorXd x00;
  Eigen::VectorXd v00;
  Eigen::VectorXd f0;

  /// Taylor map f0 + A dx + B dv.
  Eigen::VectorXd predict(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;
  /// Incremental map x00 + A dx + B dv, the model behind O-inf.
  Eigen::VectorXd propagate(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;
  double spectral_radius() const;
  bool is_schur() const { return spectral_radius() < 1.0; }
};

LinearSSM linearize(const train::Model& model, const Eigen::VectorXd& x00,
                    const Eigen::VectorXd& v00);

Eigen::VectorXd to_eigen(const std::vector<double>& v);
std::vector<double> to_std(const Eigen::VectorXd& v);

}  // namespace psm::control
