#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "psm/core/matrix.hpp"
#include "psm/core/scaling.hpp"
#include "psm/core/scenario.hpp"
#include "psm/solver/record.hpp"

namespace psm::train {

/// Column layout of a scaled network input row: [z*, t*, v* (p), x0* (3 q)].
/// x0 is station-major: [p, u, T] for station 0, then station 1, ...
struct InputLayout {
  std::size_t n_controls = 0;
  std::size_t n_stations = 0;

  static constexpr std::size_t z_col = 0;
  static constexpr std::size_t t_col = 1;
  std::size_t v_col() const { return 2; }
  std::size_t x0_col() const { return 2 + n_controls; }
  std::size_t x0_size() const { return 3 * n_stations; }
  std::size_t input_dim() const { return 2 + n_controls + 3 * n_stations; }
};

/// Supervised rows in the state-space form. For every episode step k and sensor
/// station: a t = 0 row whose target is x0_k at that station, then a t = delta_t
/// row whose target is the measurement at step k + 1.
struct Dataset {
  InputLayout layout;
  Matrix inputs;   // rows x input_dim, scaled
  Matrix targets;  // rows x 3, scaled
  std::vector<std::size_t> record_of_row;
  std::vector<std::size_t> step_of_row;
  std::vector<std::size_t> station_of_row;
  std::vector<unsigned char> is_initial;  // 1 for t = 0 rows

  std::size_t size() const { return inputs.rows; }
};

/// Min-max ranges from every full-field snapshot in `records` widened by `margin`
/// on each side; controls use the scenario's input ranges. t_max = delta_t, z_max = L.
ScalingSpec compute_scaling(const std::vector<solver::SimulationRecord>& records,
                            const ScenarioConfig& scenario, double margin = 0.05);

Dataset assemble_dataset(const std::vector<solver::SimulationRecord>& records,
                         const ScenarioConfig& scenario, const ScalingSpec& scaling);

/// One scaled input row from physical values.
std::vector<double> make_input(const ScalingSpec& scaling, const InputLayout& layout, double z,
                               double t, std::span<const double> v, std::span<const double> x0);

/// Rows [first, first + count) of a matrix, or the rows listed in `index`.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> index);

}  // namespace psm::train
