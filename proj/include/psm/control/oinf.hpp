#pragma once

#include <vector>

#include <Eigen/Dense>

#include "psm/control/linear_ssm.hpp"
#include "psm/core/scaling.hpp"
#include "psm/core/scenario.hpp"

namespace psm::control {

/// Half-spaces c . x <= d on the scaled sensor state.
struct ConstraintRow {
  Eigen::VectorXd c;
  double d = 0.0;
};

struct ConstraintSet {
  std::vector<ConstraintRow> rows;
  bool empty() const { return rows.empty(); }
};

/// Scaled constraint rows of the scenario schedules active at time t. Each
/// schedule must sit on a sensor station.
ConstraintSet constraints_at(const std::vector<ConstraintSchedule>& schedules,
                             const std::vector<double>& stations, const ScalingSpec& scaling,
                             double t);

/// Finite-horizon maximal output admissible set about (x00, v00):
/// hx (x - x00) + hv (v - v00) <= h. Rows are grouped by horizon step k = 0..T,
/// followed by the tightened steady-state rows.
struct OInfApprox {
  Eigen::MatrixXd hx;
  Eigen::MatrixXd hv;
  Eigen::VectorXd h;
  Eigen::VectorXd x00;
  Eigen::VectorXd v00;
  int horizon = 0;
  double epsilon = 0.0;

  Eigen::Index rows() const { return h.size(); }
  /// h - hx dx - hv dv; nonnegative entries mean the row holds.
  Eigen::VectorXd slack(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;
  bool contains(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double tol = 1e-10) const;
};

/// `per_step` gives the constraint set for each horizon step k = 0..T (a single
/// entry is reused for all steps); the steady-state rows use the last entry.
/// Throws NumericalError when A is not Schur or I - A is singular.
OInfApprox build_oinf(const LinearSSM& ssm, const std::vector<ConstraintSet>& per_step, int horizon,
                      double epsilon);
OInfApprox build_oinf(const LinearSSM& ssm, const ConstraintSet& y, int horizon, double epsilon);

}  // namespace psm::control
