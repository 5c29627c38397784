#include "psm/control/oinf.hpp"

#include <cmath>
#include <string>

#include "psm/core/errors.hpp"

namespace psm::control {

ConstraintSet constraints_at(const std::vector<ConstraintSchedule>& schedules,
                             const std::vector<double>& stations, const ScalingSpec& scaling,
                             double t) {
  ConstraintSet set;
  const auto q = static_cast<Eigen::Index>(3 * stations.size());
  for (const auto& s : schedules) {
    std::size_t j = stations.size();
    for (std::size_t i = 0; i < stations.size(); ++i) {
      if (std::abs(stations[i] - s.station_z) < 1e-9) j = i;
    }
    if (j == stations.size()) {
      throw ConfigError("constraint at z = " + std::to_string(s.station_z) + " is not a sensor station");
    }
    const int field = s.field == 'p' ? 0 : s.field == 'u' ? 1 : 2;
    const double bound = scaling.field(field).scale(s.bound_at(t));
    ConstraintRow row{Eigen::VectorXd::Zero(q), s.upper ? bound : -bound};
    row.c(static_cast<Eigen::Index>(3 * j) + field) = s.upper ? 1.0 : -1.0;
    set.rows.push_back(row);
  }
  return set;
}

Eigen::VectorXd OInfApprox::slack(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const {
  return h - hx * (x - x00) - hv * (v - v00);
}

bool OInfApprox::contains(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double tol) const {
  return rows() == 0 || slack(x, v).minCoeff() >= -tol;
}

OInfApprox build_oinf(const LinearSSM& ssm, const std::vector<ConstraintSet>& per_step, int horizon,
                      double epsilon) {
  if (horizon < 1) throw ConfigError("oinf: horizon must be >= 1");
  if (per_step.empty()) throw ConfigError("oinf: no constraint set");
  const double rho = ssm.spectral_radius();
  if (!(rho < 1.0)) {
    throw NumericalError("oinf: linearized A is not Schur (spectral radius " + std::to_string(rho) + ")");
  }
  const Eigen::Index q = ssm.a.rows();
  const Eigen::Index p = ssm.b.cols();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(q, q);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(eye - ssm.a);
  if (!lu.isInvertible()) throw NumericalError("oinf: I - A is singular");

  auto set_for = [&](int k) -> const ConstraintSet& {
    return per_step[std::min<std::size_t>(static_cast<std::size_t>(k), per_step.size() - 1)];
  };
  Eigen::Index n_rows = 0;
  for (int k = 0; k <= horizon; ++k) n_rows += static_cast<Eigen::Index>(set_for(k).rows.size());
  n_rows += static_cast<Eigen::Index>(per_step.back().rows.size());

  OInfApprox o;
  o.hx.resize(n_rows, q);
  o.hv.resize(n_rows, p);
  o.h.resize(n_rows);
  o.x00 = ssm.x00;
  o.v00 = ssm.v00;
  o.horizon = horizon;
  o.epsilon = epsilon;

  // dx_k = A^k dx_0 + S_k B dv, S_k = sum_{j<k} A^j.
  Eigen::MatrixXd ak = eye;
  Eigen::MatrixXd sk = Eigen::MatrixXd::Zero(q, q);
  Eigen::Index r = 0;
  for (int k = 0; k <= horizon; ++k) {
    const Eigen::MatrixXd skb = sk * ssm.b;
    for (const auto& row : set_for(k).rows) {
      o.hx.row(r) = row.c.transpose() * ak;
      o.hv.row(r) = row.c.transpose() * skb;
      o.h(r) = row.d - row.c.dot(ssm.x00);
      ++r;
    }
    sk += ak;
    ak = ssm.a * ak;
  }
  const Eigen::MatrixXd gain = lu.solve(ssm.b);
  for (const auto& row : per_step.back().rows) {
    o.hx.row(r).setZero();
    o.hv.row(r) = row.c.transpose() * gain;
    o.h(r) = row.d - row.c.dot(ssm.x00) - epsilon;
    ++r;
  }
  return o;
}

OInfApprox build_oinf(const LinearSSM& ssm, const ConstraintSet& y, int horizon, double epsilon) {
  return build_oinf(ssm, std::vector<ConstraintSet>{y}, horizon, epsilon);
}

}  // namespace psm::control
