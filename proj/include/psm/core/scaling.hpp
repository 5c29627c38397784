#pragma once

#include <span>
#include <vector>

#include "psm/core/field_state.hpp"

namespace psm {

struct FieldRange {
  double min = 0.0;
  double max = 1.0;

  double span() const { return max - min; }
  double scale(double x) const { return (x - min) / (max - min); }
  double unscale(double s) const { return min + s * (max - min); }
};

/// Min-max scaling of positions, times, fields and control channels.
struct ScalingSpec {
  double z_max = 1.0;
  double t_max = 1.0;
  FieldRange p;
  FieldRange u;
  FieldRange T;
  FieldRange rho;
  std::vector<FieldRange> controls;

  /// Throws ConfigError when any range is degenerate (max <= min) or z_max/t_max <= 0.
  void validate() const;

  const FieldRange& field(int index) const;  // 0 = p, 1 = u, 2 = T
};

FieldState scale_state(const ScalingSpec& spec, const FieldState& state);
FieldState unscale_state(const ScalingSpec& spec, const FieldState& state);

std::vector<double> scale_controls(const ScalingSpec& spec, std::span<const double> v);
std::vector<double> unscale_controls(const ScalingSpec& spec, std::span<const double> v);

/// Sensor vectors are station-major: [p0, u0, T0, p1, u1, T1, ...].
std::vector<double> scale_sensors(const ScalingSpec& spec, std::span<const double> x);
std::vector<double> unscale_sensors(const ScalingSpec& spec, std::span<const double> x);

/// Widens [lo, hi] by `margin * (hi - lo)` on both sides.
FieldRange with_margin(double lo, double hi, double margin);

}  // namespace psm
