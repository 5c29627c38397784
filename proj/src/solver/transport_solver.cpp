#include "psm/solver/transport_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "psm/core/errors.hpp"

namespace psm::solver {

struct TransportSolver::Work {
  std::vector<double> T;       // cells
  std::vector<double> W;       // faces, n + 1 entries
  std::vector<double> W_prev;  // faces at the start of the last substep
  std::vector<double> p;       // cells
};

namespace {

double friction_k(const PipeSegment& s) { return s.friction_factor / (2.0 * s.hydraulic_diameter); }

}  // namespace

TransportSolver::TransportSolver(ScenarioConfig config, SolverConfig solver_config)
    : config_(std::move(config)), solver_config_(solver_config) {
  validate(config_);
  if (!(solver_config_.substep > 0.0) || solver_config_.substep > config_.delta_t + 1e-12) {
    throw ConfigError("solver: substep must be positive and not exceed delta_t");
  }
  const double ratio = config_.delta_t / solver_config_.substep;
  n_substeps_ = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(n_substeps_)) > 1e-9 * ratio) {
    throw ConfigError("solver: substep must divide delta_t");
  }
  grid_ = build_grid(config_);
  for (std::size_t i = 0; i < grid_.n_cells(); ++i) {
    area_.push_back(config_.segments[grid_.segment_of_cell[i]].flow_area);
  }
}

FieldState TransportSolver::initial_guess(const std::vector<double>& v) const {
  if (v.size() != config_.n_controls()) throw ConfigError("solver: control vector size mismatch");
  const std::size_t n = grid_.n_cells();
  const auto& fl = config_.fluid;
  Work w;
  if (config_.kind == ScenarioKind::heated_channel) {
    const double T_in = v[config_.boundary.inlet_temperature_channel];
    const double u_in = v[config_.boundary.inlet_velocity_channel];
    w.T.assign(n, T_in);
    w.W.assign(n + 1, density(fl, T_in) * u_in * area_.front());
  } else {
    const double T0 = config_.boundary.initial_temperature;
    const double rho = density(fl, T0);
    double resistance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& seg = config_.segments[grid_.segment_of_cell[i]];
      resistance += grid_.dz[i] * friction_k(seg) / (area_[i] * area_[i]);
    }
    const double dp = v[config_.boundary.pump_channel];
    if (!(dp > 0.0) || !(resistance > 0.0)) {
      throw NumericalError("solver: loop needs a positive pump head and friction to define a flow");
    }
    w.T.assign(n, T0);
    w.W.assign(n + 1, std::sqrt(dp * rho / resistance));
  }
  w.W_prev = w.W;
  reconstruct_pressure(w, v, solver_config_.substep);
  return to_state(w);
}

std::vector<double> TransportSolver::initial_face_flow(const FieldState& s,
                                                       const std::vector<double>& v) const {
  const std::size_t n = grid_.n_cells();
  if (s.face_mass_flow.size() == n + 1) return s.face_mass_flow;
  const auto& fl = config_.fluid;
  std::vector<double> cell(n);
  for (std::size_t i = 0; i < n; ++i) cell[i] = density(fl, s.T[i]) * s.u[i] * area_[i];
  std::vector<double> W(n + 1);
  for (std::size_t f = 1; f < n; ++f) W[f] = 0.5 * (cell[f - 1] + cell[f]);
  if (config_.kind == ScenarioKind::heated_channel) {
    const double T_in = v[config_.boundary.inlet_temperature_channel];
    W[0] = density(fl, T_in) * v[config_.boundary.inlet_velocity_channel] * area_.front();
    W[n] = cell[n - 1];
  } else {
    W[0] = 0.5 * (cell[n - 1] + cell[0]);
    W[n] = W[0];
  }
  return W;
}

void TransportSolver::substep(Work& w, const std::vector<double>& v, double dt) const {
  const std::size_t n = grid_.n_cells();
  const auto& fl = config_.fluid;
  const std::vector<double> Tn = w.T;
  const std::vector<double> Wn = w.W;
  std::vector<double> rho_n(n), cap(n), src(n);
  for (std::size_t i = 0; i < n; ++i) {
    rho_n[i] = density(fl, Tn[i]);
    cap[i] = area_[i] * grid_.dz[i] * rho_n[i] / dt;
    src[i] = config_.source_at(grid_.centers[i], v) * area_[i] * grid_.dz[i] / fl.cp;
  }
  auto mass_change = [&](std::size_t i, double T) {
    return area_[i] * grid_.dz[i] * (density(fl, T) - rho_n[i]) / dt;
  };

  if (config_.kind == ScenarioKind::heated_channel) {
    const double T_in = v[config_.boundary.inlet_temperature_channel];
    w.W[0] = density(fl, T_in) * v[config_.boundary.inlet_velocity_channel] * area_.front();
    double T_up = T_in;
    for (std::size_t i = 0; i < n; ++i) {
      // Conservative implicit upwind combined with continuity leaves a purely
      // local update: cap (T - Tn) + W_i (T - T_up) = src.
      w.T[i] = (cap[i] * Tn[i] + w.W[i] * T_up + src[i]) / (cap[i] + w.W[i]);
      w.W[i + 1] = w.W[i] - mass_change(i, w.T[i]);
      T_up = w.T[i];
    }
    audit_.mass_in += w.W[0] * dt;
    audit_.mass_out += w.W[n] * dt;
    audit_.enthalpy_in += w.W[0] * T_in * dt;
    audit_.enthalpy_out += w.W[n] * w.T[n - 1] * dt;
  } else {
    const double dp = v[config_.boundary.pump_channel];
    // Face coefficients for the loop-integrated momentum balance. Face 0 sits at the
    // pump; face f > 0 joins cells f-1 and f.
    std::vector<double> inertia(n), fric(n), grav_len(n);
    for (std::size_t f = 0; f < n; ++f) {
      const std::size_t l = (f == 0) ? n - 1 : f - 1;
      const auto& sl = config_.segments[grid_.segment_of_cell[l]];
      const auto& sr = config_.segments[grid_.segment_of_cell[f]];
      inertia[f] = 0.5 * grid_.dz[l] / area_[l] + 0.5 * grid_.dz[f] / area_[f];
      fric[f] = 0.5 * grid_.dz[l] * friction_k(sl) / (area_[l] * area_[l]) +
                0.5 * grid_.dz[f] * friction_k(sr) / (area_[f] * area_[f]);
      grav_len[f] = 0.5 * grid_.dz[l] * sl.gravity_component + 0.5 * grid_.dz[f] * sr.gravity_component;
    }
    std::vector<double> delta(n + 1, 0.0), T_old;
    double W0 = Wn[0];
    bool converged = false;
    int it = 0;
    for (; it < solver_config_.max_iterations; ++it) {
      T_old = w.T;
      const double W0_old = W0;
      delta[0] = 0.0;
      for (std::size_t i = 0; i < n; ++i) delta[i + 1] = delta[i] - mass_change(i, w.T[i]);

      // Scalar Newton on sum_f [inertia dW/dt + fric W|W|/rho - rho g dz] = dp.
      for (int k = 0; k < 50; ++k) {
        double F = -dp, dF = 0.0;
        for (std::size_t f = 0; f < n; ++f) {
          const double rho_up = density(fl, w.T[f == 0 ? n - 1 : f - 1]);
          const double Wf = W0 + delta[f];
          F += inertia[f] * (Wf - Wn[f]) / dt + fric[f] * Wf * std::abs(Wf) / rho_up -
               rho_up * grav_len[f];
          dF += inertia[f] / dt + 2.0 * fric[f] * std::abs(Wf) / rho_up;
        }
        const double step = F / dF;
        W0 -= step;
        if (std::abs(step) <= 1e-14 * std::abs(W0)) break;
      }
      for (std::size_t f = 0; f <= n; ++f) w.W[f] = W0 + delta[f];
      for (std::size_t f = 0; f <= n; ++f) {
        if (!(w.W[f] > 0.0)) {
          throw NumericalError("solver: flow reversal at face " + std::to_string(f) +
                               " is not supported");
        }
      }

      // Cyclic upwind sweep: T_i = alpha_i + beta_i * T_{n-1}.
      std::vector<double> alpha(n), beta(n);
      double a_prev = 0.0, b_prev = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double den = cap[i] + w.W[i];
        alpha[i] = (cap[i] * Tn[i] + w.W[i] * a_prev + src[i]) / den;
        beta[i] = w.W[i] * b_prev / den;
        a_prev = alpha[i];
        b_prev = beta[i];
      }
      const double T_last = alpha[n - 1] / (1.0 - beta[n - 1]);
      double dT = 0.0, Tmax = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w.T[i] = alpha[i] + beta[i] * T_last;
        dT = std::max(dT, std::abs(w.T[i] - T_old[i]));
        Tmax = std::max(Tmax, std::abs(w.T[i]));
      }
      if (dT <= solver_config_.tolerance * Tmax &&
          std::abs(W0 - W0_old) <= solver_config_.tolerance * std::abs(W0)) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NumericalError("solver: loop iteration did not converge in " + std::to_string(it) +
                           " iterations");
    }
    // Refresh the flows from the converged temperatures.
    for (std::size_t i = 0; i < n; ++i) w.W[i + 1] = w.W[i] - mass_change(i, w.T[i]);
    const double expansion = w.W[0] - w.W[n];
    audit_.mass_in += std::max(expansion, 0.0) * dt;
    audit_.mass_out += std::max(-expansion, 0.0) * dt;
    audit_.enthalpy_in += w.W[0] * w.T[n - 1] * dt;
    audit_.enthalpy_out += w.W[n] * w.T[n - 1] * dt;
  }
  for (std::size_t i = 0; i < n; ++i) audit_.source += src[i] * dt;

  for (std::size_t f = 0; f <= n; ++f) {
    const std::size_t up = (f == 0) ? (config_.kind == ScenarioKind::loop ? n - 1 : 0) : f - 1;
    const double rho_up = density(fl, w.T[up]);
    const double courant = w.W[f] / (rho_up * area_[std::min(f, n - 1)]) * dt /
                           grid_.dz[std::min(f, n - 1)];
    if (!(courant <= 1.0)) {
      std::ostringstream os;
      os << "solver: advective Courant number " << courant << " > 1 at face " << f
         << " (substep " << dt << " s)";
      throw NumericalError(os.str());
    }
  }
}

void TransportSolver::reconstruct_pressure(Work& w, const std::vector<double>& v, double dt) const {
  (void)v;
  const std::size_t n = grid_.n_cells();
  const auto& fl = config_.fluid;
  std::vector<double> mom_flux(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = density(fl, w.T[i]);
    const double u = (w.W[i] + w.W[i + 1]) / (2.0 * rho * area_[i]);
    mom_flux[i] = rho * u * u;
  }
  // Pressure change over half of cell i at face flow Wf (positive in flow direction).
  auto half = [&](std::size_t i, std::size_t f, double rho_up) {
    const auto& seg = config_.segments[grid_.segment_of_cell[i]];
    const double Wf = w.W[f];
    return 0.5 * grid_.dz[i] *
           ((Wf - w.W_prev[f]) / (area_[i] * dt) +
            friction_k(seg) * Wf * std::abs(Wf) / (rho_up * area_[i] * area_[i]) -
            rho_up * seg.gravity_component);
  };
  w.p.assign(n, 0.0);
  if (config_.kind == ScenarioKind::heated_channel) {
    w.p[n - 1] = half(n - 1, n, density(fl, w.T[n - 1]));
    for (std::size_t f = n - 1; f >= 1; --f) {
      const double rho_up = density(fl, w.T[f - 1]);
      w.p[f - 1] = w.p[f] + half(f - 1, f, rho_up) + half(f, f, rho_up) + mom_flux[f] -
                   mom_flux[f - 1];
    }
  } else {
    const double rho0 = density(fl, w.T[n - 1]);
    w.p[0] = -(half(0, 0, rho0) + mom_flux[0] - mom_flux[n - 1]);
    for (std::size_t f = 1; f < n; ++f) {
      const double rho_up = density(fl, w.T[f - 1]);
      w.p[f] = w.p[f - 1] -
               (half(f - 1, f, rho_up) + half(f, f, rho_up) + mom_flux[f] - mom_flux[f - 1]);
    }
  }
}

FieldState TransportSolver::to_state(const Work& w) const {
  const std::size_t n = grid_.n_cells();
  FieldState s;
  s.z = grid_.centers;
  s.T = w.T;
  s.p = w.p;
  s.u.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.u[i] = (w.W[i] + w.W[i + 1]) / (2.0 * density(config_.fluid, w.T[i]) * area_[i]);
  }
  s.face_mass_flow = w.W;
  return s;
}

FieldState TransportSolver::step(const FieldState& state, const std::vector<double>& v) const {
  if (v.size() != config_.n_controls()) throw ConfigError("solver: control vector size mismatch");
  if (state.size() != grid_.n_cells()) throw ConfigError("solver: state not on the scenario grid");
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericalError("solver: non-finite control input");
  }
  Work w;
  w.T = state.T;
  w.W = initial_face_flow(state, v);
  audit_ = {};
  const double dt = config_.delta_t / static_cast<double>(n_substeps_);
  for (std::size_t s = 0; s < n_substeps_; ++s) {
    w.W_prev = w.W;
    substep(w, v, dt);
  }
  for (double T : w.T) {
    if (!std::isfinite(T)) throw NumericalError("solver: non-finite temperature");
  }
  reconstruct_pressure(w, v, dt);
  return to_state(w);
}

double TransportSolver::relative_change(const FieldState& a, const FieldState& b) const {
  auto range = [](const std::vector<double>& x) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
  };
  double mean_u = 0.0;
  for (double u : a.u) mean_u += std::abs(u);
  mean_u /= static_cast<double>(a.u.size());
  const double sp = std::max(range(a.p), 1.0);
  const double su = std::max(mean_u, 1e-3);
  const double sT = std::max(range(a.T), 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.p[i] - b.p[i]) / sp);
    worst = std::max(worst, std::abs(a.u[i] - b.u[i]) / su);
    worst = std::max(worst, std::abs(a.T[i] - b.T[i]) / sT);
  }
  return worst;
}

FieldState TransportSolver::steady_state(const std::vector<double>& v) const {
  return steady_state(v, initial_guess(v));
}

FieldState TransportSolver::steady_state(const std::vector<double>& v, const FieldState& start) const {
  FieldState s = start;
  double change = 0.0;
  for (double t = 0.0; t < solver_config_.steady_max_time; t += config_.delta_t) {
    FieldState next = step(s, v);
    change = relative_change(s, next);
    s = std::move(next);
    if (change < solver_config_.steady_tolerance) return s;
  }
  std::ostringstream os;
  os << "solver: no steady state within " << solver_config_.steady_max_time
     << " s (last relative change " << change << ")";
  throw NumericalError(os.str());
}

std::vector<double> TransportSolver::sensors(const FieldState& state) const {
  std::vector<double> out;
  out.reserve(3 * config_.n_stations());
  for (double z : config_.sensor_stations) {
    out.push_back(interpolate_centers(grid_, state.p, z));
    out.push_back(interpolate_centers(grid_, state.u, z));
    out.push_back(interpolate_centers(grid_, state.T, z));
  }
  return out;
}

}  // namespace psm::solver
