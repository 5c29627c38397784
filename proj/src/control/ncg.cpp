#include "psm/control/ncg.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "psm/control/governor.hpp"
#include "psm/control/linear_ssm.hpp"
#include "psm/control/oinf.hpp"
#include "psm/core/errors.hpp"

namespace psm::control {

namespace {

std::vector<double> measured_outputs(const std::vector<ConstraintSchedule>& schedules,
                                     const std::vector<double>& stations,
                                     const std::vector<double>& x) {
  std::vector<double> out;
  for (const auto& s : schedules) {
    for (std::size_t i = 0; i < stations.size(); ++i) {
      if (std::abs(stations[i] - s.station_z) < 1e-9) {
        const int field = s.field == 'p' ? 0 : s.field == 'u' ? 1 : 2;
        out.push_back(x[3 * i + static_cast<std::size_t>(field)]);
      }
    }
  }
  return out;
}

double excess(const std::vector<ConstraintSchedule>& schedules, const std::vector<double>& outputs,
              double t) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < schedules.size() && i < outputs.size(); ++i) {
    const double b = schedules[i].bound_at(t);
    worst = std::max(worst, schedules[i].upper ? outputs[i] - b : b - outputs[i]);
  }
  return worst;
}

}  // namespace

NcgLog ncg_rollout(const train::Model& model, const solver::TransportSolver& env,
                   const solver::InputTrajectory& reference,
                   const std::vector<ConstraintSchedule>& schedules, const CgConfig& cfg,
                   std::optional<std::vector<double>> v_init) {
  if (cfg.gamma < 1 || cfg.horizon < 1) throw ConfigError("ncg: gamma and horizon must be >= 1");
  const auto& scenario = env.config();
  const auto& sc = model.scaling;
  const double dt = scenario.delta_t;
  const auto n_steps = static_cast<std::size_t>(std::llround(scenario.episode_duration / dt));
  const Eigen::Index p = static_cast<Eigen::Index>(scenario.controls.size());
  const Eigen::MatrixXd q = cfg.q.size() == 0 ? Eigen::MatrixXd::Identity(p, p) : cfg.q;

  QpOptions opt;
  opt.tolerance = cfg.qp_tolerance;
  opt.max_sweeps = cfg.max_sweeps;
  opt.lower = to_eigen(scale_controls(sc, scenario.lower_bounds()));
  opt.upper = to_eigen(scale_controls(sc, scenario.upper_bounds()));

  std::vector<double> v_prev = v_init ? *v_init : reference.at(0.0);
  FieldState state = env.steady_state(v_prev);
  std::vector<double> x = env.sensors(state);

  NcgLog log;
  log.max_violation = -std::numeric_limits<double>::infinity();
  LinearSSM ssm;
  OInfApprox set;
  std::vector<double> built_for;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const std::vector<double> r = reference.at(t);
    NcgStep step;
    step.k = k;
    step.t = t;
    step.r = r;
    step.outputs = measured_outputs(schedules, model.stations, x);
    for (const auto& s : schedules) step.bounds.push_back(s.bound_at(t));
    if (!schedules.empty()) log.max_violation = std::max(log.max_violation, excess(schedules, step.outputs, t));

    if (schedules.empty()) {
      step.v = r;
      step.qp_status = "none";
    } else {
      const Eigen::VectorXd xs = to_eigen(scale_sensors(sc, x));
      const Eigen::VectorXd vps = to_eigen(scale_controls(sc, v_prev));
      bool rebuild = false;
      if (k % static_cast<std::size_t>(cfg.gamma) == 0) {
        ssm = linearize(model, xs, vps);
        ++log.linearizations;
        rebuild = true;
      }
      std::vector<ConstraintSet> per_step;
      std::vector<double> bounds;
      for (int j = 0; j <= cfg.horizon; ++j) {
        per_step.push_back(constraints_at(schedules, model.stations, sc, t + j * dt));
        for (const auto& row : per_step.back().rows) bounds.push_back(row.d);
      }
      if (bounds != built_for) rebuild = true;
      if (rebuild) {
        try {
          set = build_oinf(ssm, per_step, cfg.horizon, cfg.epsilon);
        } catch (const NumericalError& e) {
          throw NumericalError("ncg: step " + std::to_string(k) + " (t = " + std::to_string(t) +
                               " s): " + e.what());
        }
        built_for = bounds;
        ++log.rebuilds;
      }
      const QpResult qp = cg_solve(set, xs, to_eigen(scale_controls(sc, r)), q, vps, opt);
      step.v = unscale_controls(sc, to_std(qp.v));
      step.qp_status = to_string(qp.status);
    }
    step.spectral_radius = schedules.empty() ? 0.0 : ssm.spectral_radius();
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double range = scenario.controls[i].max - scenario.controls[i].min;
      if (std::abs(step.v[i] - r[i]) > 1e-9 * range) step.active = true;
    }
    state = env.step(state, step.v);
    x = env.sensors(state);
    v_prev = step.v;
    log.steps.push_back(std::move(step));
  }
  if (!schedules.empty()) {
    const double t_end = static_cast<double>(n_steps) * dt;
    log.max_violation = std::max(
        log.max_violation, excess(schedules, measured_outputs(schedules, model.stations, x), t_end));
  } else {
    log.max_violation = 0.0;
  }
  return log;
}

void write_ncg_csv(const NcgLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(10);
  if (log.steps.empty()) return;
  const auto& s0 = log.steps.front();
  out << "step,t";
  for (std::size_t i = 0; i < s0.r.size(); ++i) out << ",r" << i;
  for (std::size_t i = 0; i < s0.v.size(); ++i) out << ",v" << i;
  out << ",qp_status,active";
  for (std::size_t i = 0; i < s0.outputs.size(); ++i) out << ",y" << i;
  for (std::size_t i = 0; i < s0.bounds.size(); ++i) out << ",bound" << i;
  out << '\n';
  for (const auto& s : log.steps) {
    out << s.k << ',' << s.t;
    for (double v : s.r) out << ',' << v;
    for (double v : s.v) out << ',' << v;
    out << ',' << s.qp_status << ',' << (s.active ? 1 : 0);
    for (double v : s.outputs) out << ',' << v;
    for (double v : s.bounds) out << ',' << v;
    out << '\n';
  }
}

}  // namespace psm::control
