#include "psm/control/linear_ssm.hpp"

#include <Eigen/Eigenvalues>

namespace psm::control {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd LinearSSM::predict(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const {
  return f0 + a * (x - x00) + b * (v - v00);
}

Eigen::VectorXd LinearSSM::propagate(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const {
  return x00 + a * (x - x00) + b * (v - v00);
}

double LinearSSM::spectral_radius() const {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

LinearSSM linearize(const train::Model& model, const Eigen::VectorXd& x00, const Eigen::VectorXd& v00) {
  const auto x = to_std(x00);
  const auto v = to_std(v00);
  const auto jac = train::step_jacobian(model, x, v);
  LinearSSM s;
  const auto q = static_cast<Eigen::Index>(jac.a.rows);
  const auto p = static_cast<Eigen::Index>(jac.b.cols);
  s.a = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      jac.a.ptr(), q, q);
  s.b = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      jac.b.ptr(), q, p);
  s.x00 = x00;
  s.v00 = v00;
  s.f0 = to_eigen(jac.value);
  return s;
}

}  // namespace psm::control
