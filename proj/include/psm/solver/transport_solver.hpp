#pragma once

#include <vector>

#include "psm/core/field_state.hpp"
#include "psm/core/grid.hpp"
#include "psm/core/scenario.hpp"

namespace psm::solver {

struct SolverConfig {
  double substep = 0.05;          // s
  double tolerance = 1e-11;       // relative, Picard / Newton iterations
  int max_iterations = 60;
  double steady_tolerance = 1e-8; // max field change per delta_t, relative to field scale
  double steady_max_time = 5000.0;
};

/// Finite-volume transport solver on a staggered grid.
///
/// Energy is advanced with implicit first-order upwinding; combined with the
/// discrete continuity equation the update reduces to a single downstream sweep.
/// Face mass flows follow from continuity (heated channel, inlet flow imposed) or
/// from the loop-integrated momentum balance with the pump jump (loop). Pressure
/// is then reconstructed from the face momentum balances, starting at the
/// reference boundary. In the loop an expansion connection at the pump outlet
/// absorbs thermal expansion so that mass and energy balances can both close.
class TransportSolver {
 public:
  TransportSolver(ScenarioConfig config, SolverConfig solver_config = {});

  const ScenarioConfig& config() const { return config_; }
  const SolverConfig& solver_config() const { return solver_config_; }
  const Grid& grid() const { return grid_; }

  /// Crude initial field for the given inputs (uniform temperature and flow).
  FieldState initial_guess(const std::vector<double>& controls) const;

  /// Advances delta_t with inputs held constant.
  FieldState step(const FieldState& state, const std::vector<double>& controls) const;

  /// Marches step() until the per-delta_t change falls below the steady tolerance.
  FieldState steady_state(const std::vector<double>& controls) const;
  FieldState steady_state(const std::vector<double>& controls, const FieldState& start) const;

  /// Field values at the sensor stations, station-major [p, u, T].
  std::vector<double> sensors(const FieldState& state) const;

  /// Largest per-field change between two states relative to each field's scale.
  double relative_change(const FieldState& a, const FieldState& b) const;

  /// Counters from the last step() call, for conservation checks.
  struct StepAudit {
    double mass_in = 0.0;   // kg entering through boundaries / expansion over the step
    double mass_out = 0.0;
    double enthalpy_in = 0.0;  // J/Cp units: kg K
    double enthalpy_out = 0.0;
    double source = 0.0;       // kg K (heat / Cp)
  };
  const StepAudit& last_audit() const { return audit_; }

 private:
  struct Work;
  void substep(Work& w, const std::vector<double>& controls, double dt) const;
  void reconstruct_pressure(Work& w, const std::vector<double>& controls, double dt) const;
  std::vector<double> initial_face_flow(const FieldState& s, const std::vector<double>& v) const;
  FieldState to_state(const Work& w) const;

  ScenarioConfig config_;
  SolverConfig solver_config_;
  Grid grid_;
  std::vector<double> area_;  // per cell
  std::size_t n_substeps_ = 1;
  mutable StepAudit audit_;
};

}  // namespace psm::solver
