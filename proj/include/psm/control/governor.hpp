#pragma once

#include <optional>

#include <Eigen/Dense>

#include "psm/control/oinf.hpp"

namespace psm::control {

struct SrgResult {
  double kappa = 0.0;
  bool admissible_start = true;  // false when (x, v_prev) was outside the set
};

/// Largest kappa in [0, 1] with (x, v_prev + kappa (r - v_prev)) inside the set,
/// by bisection to `tol`.
SrgResult srg_kappa(const OInfApprox& set, const Eigen::VectorXd& x, const Eigen::VectorXd& v_prev,
                    const Eigen::VectorXd& r, double tol = 1e-9);

struct QpOptions {
  double tolerance = 1e-9;
  long max_sweeps = 100000;
  /// Optional box on v (scaled), appended to the set rows.
  std::optional<Eigen::VectorXd> lower;
  std::optional<Eigen::VectorXd> upper;
};

enum class QpStatus { optimal, infeasible, max_sweeps };

struct QpResult {
  Eigen::VectorXd v;
  QpStatus status = QpStatus::optimal;
  long sweeps = 0;
  double kkt_residual = 0.0;
  double max_violation = 0.0;
};

/// min ||v - r||_Q^2 subject to the set rows at fixed x, by Hildreth's dual
/// coordinate ascent. On infeasibility or non-convergence v = v_prev and the
/// status says why.
QpResult cg_solve(const OInfApprox& set, const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                  const Eigen::MatrixXd& q, const Eigen::VectorXd& v_prev,
                  const QpOptions& options = {});

const char* to_string(QpStatus s);

}  // namespace psm::control
