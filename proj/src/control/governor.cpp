#include "psm/control/governor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "psm/core/errors.hpp"

namespace psm::control {

namespace {

// Exact KKT point from an active subset of at most p rows drawn from `cand`.
// Hildreth converges slowly when many rows are nearly parallel, which is the
// normal shape of O-inf rows late in the horizon; for small p the candidate
// subsets are few enough to enumerate.
bool polish(const Eigen::MatrixXd& g, const Eigen::VectorXd& b, const Eigen::VectorXd& dr,
            const Eigen::MatrixXd& einv_gt, const Eigen::MatrixXd& h, const std::vector<Eigen::Index>& cand,
            double tol, Eigen::VectorXd& dv_out, Eigen::VectorXd& lambda_out) {
  const Eigen::Index p = dr.size();
  const Eigen::VectorXd k = b - g * dr;
  auto try_set = [&](const std::vector<Eigen::Index>& s) {
    const auto n = static_cast<Eigen::Index>(s.size());
    Eigen::MatrixXd hs(n, n);
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      ks(i) = k(s[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < n; ++j) hs(i, j) = h(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(hs);
    if (lu.rank() < n) return false;
    const Eigen::VectorXd ls = lu.solve(-ks);
    if (ls.minCoeff() < 0.0) return false;
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(b.size());
    for (Eigen::Index i = 0; i < n; ++i) lambda(s[static_cast<std::size_t>(i)]) = ls(i);
    const Eigen::VectorXd dv = dr - einv_gt * lambda;
    if ((g * dv - b).maxCoeff() > tol) return false;
    dv_out = dv;
    lambda_out = lambda;
    return true;
  };
  for (const Eigen::Index i : cand) {
    if (try_set({i})) return true;
  }
  if (p >= 2) {
    for (std::size_t a = 0; a < cand.size(); ++a) {
      for (std::size_t c = a + 1; c < cand.size(); ++c) {
        if (try_set({cand[a], cand[c]})) return true;
      }
    }
  }
  return false;
}

}  // namespace

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::max_sweeps: return "max_sweeps";
  }
  return "unknown";
}

SrgResult srg_kappa(const OInfApprox& set, const Eigen::VectorXd& x, const Eigen::VectorXd& v_prev,
                    const Eigen::VectorXd& r, double tol) {
  if (!set.contains(x, v_prev)) return {0.0, false};
  if (set.contains(x, r)) return {1.0, true};
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (set.contains(x, v_prev + mid * (r - v_prev))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, true};
}

QpResult cg_solve(const OInfApprox& set, const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                  const Eigen::MatrixXd& q_in, const Eigen::VectorXd& v_prev, const QpOptions& opt) {
  const Eigen::Index p = r.size();
  const Eigen::MatrixXd q = q_in.size() == 0 ? Eigen::MatrixXd::Identity(p, p) : q_in;
  if (q.rows() != p || q.cols() != p) throw ConfigError("cg_solve: Q must be p x p");
  Eigen::LLT<Eigen::MatrixXd> llt(2.0 * q);
  if (llt.info() != Eigen::Success) throw ConfigError("cg_solve: Q must be positive definite");
  const Eigen::VectorXd v00 = set.rows() > 0 ? set.v00 : Eigen::VectorXd::Zero(p);

  // Rows G dv <= b with dv = v - v00.
  std::vector<Eigen::VectorXd> g_rows;
  std::vector<double> b_vals;
  QpResult res;
  if (set.rows() > 0) {
    const Eigen::VectorXd b = set.slack(x, v00);
    for (Eigen::Index i = 0; i < set.rows(); ++i) {
      const Eigen::VectorXd gi = set.hv.row(i).transpose();
      if (gi.norm() < 1e-14) {
        // Row does not depend on v: either always satisfied or infeasible.
        if (b(i) < -opt.tolerance) {
          res.v = v_prev;
          res.status = QpStatus::infeasible;
          res.max_violation = -b(i);
          return res;
        }
        continue;
      }
      g_rows.push_back(gi);
      b_vals.push_back(b(i));
    }
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    if (opt.upper) {
      g_rows.push_back(Eigen::VectorXd::Unit(p, i));
      b_vals.push_back((*opt.upper)(i) - v00(i));
    }
    if (opt.lower) {
      g_rows.push_back(-Eigen::VectorXd::Unit(p, i));
      b_vals.push_back(v00(i) - (*opt.lower)(i));
    }
  }
  const auto m = static_cast<Eigen::Index>(g_rows.size());
  Eigen::MatrixXd g(m, p);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    g.row(i) = g_rows[static_cast<std::size_t>(i)].transpose();
    b(i) = b_vals[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd dr = r - v00;
  if (m == 0 || (g * dr - b).maxCoeff() <= opt.tolerance) {
    res.v = r;
    return res;
  }

  // Dual of min 1/2 dv' E dv + F' dv, E = 2Q, F = -2Q dr:
  // H = G E^-1 G', K = b - G dr, dv = dr - E^-1 G' lambda.
  const Eigen::MatrixXd einv_gt = llt.solve(g.transpose());
  const Eigen::MatrixXd h = g * einv_gt;
  const Eigen::VectorXd k = b - g * dr;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd hl = Eigen::VectorXd::Zero(m);  // H lambda, kept current
  Eigen::VectorXd dv = dr;
  for (long sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    double change = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double hii = h(i, i);
      const double w = -(k(i) + hl(i) - hii * lambda(i)) / hii;
      const double next = std::max(0.0, w);
      const double delta = next - lambda(i);
      if (delta != 0.0) {
        hl += h.col(i) * delta;
        lambda(i) = next;
        change = std::max(change, std::abs(delta) * std::sqrt(hii));
      }
    }
    dv = dr - einv_gt * lambda;
    const Eigen::VectorXd s = b - g * dv;
    const double violation = std::max(0.0, -s.minCoeff());
    const double complementarity = (lambda.array() * s.array()).abs().maxCoeff();
    res.sweeps = sweep;
    res.max_violation = violation;
    res.kkt_residual = std::max(violation, complementarity);
    if (res.kkt_residual <= opt.tolerance || (violation <= opt.tolerance && change <= 1e-15)) {
      res.v = v00 + dv;
      return res;
    }
    if (sweep % 100 == 0 && p <= 2) {
      std::vector<Eigen::Index> cand;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (lambda(i) > 0.0 || s(i) <= 1e-6) cand.push_back(i);
      }
      if (cand.size() <= 400) {
        Eigen::VectorXd dv_p, lambda_p;
        if (polish(g, b, dr, einv_gt, h, cand, opt.tolerance, dv_p, lambda_p)) {
          res.v = v00 + dv_p;
          res.max_violation = std::max(0.0, (g * dv_p - b).maxCoeff());
          res.kkt_residual = res.max_violation;
          return res;
        }
      }
    }
    if (!std::isfinite(lambda.sum()) || lambda.maxCoeff() > 1e12) {
      res.v = v_prev;
      res.status = QpStatus::infeasible;
      return res;
    }
  }
  res.v = v_prev;
  res.status = QpStatus::max_sweeps;
  return res;
}

}  // namespace psm::control
