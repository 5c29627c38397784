#pragma once

namespace psm {

/// Affine density closure rho(T) = rho_a - rho_b * T and constant specific heat.
/// Defaults are the flibe (LiF-BeF2) correlations, T in kelvin.
struct FluidProps {
  double rho_a = 2413.0;  // kg/m^3
  double rho_b = 0.488;   // kg/m^3/K
  double cp = 2414.0;     // J/kg/K
};

inline double density(const FluidProps& props, double temperature) {
  return props.rho_a - props.rho_b * temperature;
}

/// Throws ConfigError unless rho_a > 0, cp > 0 and density stays positive up to t_max.
void validate(const FluidProps& props, double t_max);

inline constexpr double kKelvinOffset = 273.15;
inline constexpr double celsius_to_kelvin(double c) { return c + kKelvinOffset; }
inline constexpr double kelvin_to_celsius(double k) { return k - kKelvinOffset; }

}  // namespace psm
