#pragma once

#include <vector>

namespace psm {

/// Snapshot of (p, u, T) on the cell-centered grid at one instant. Pressure is gage
/// pressure relative to the scenario's reference boundary.
struct FieldState {
  std::vector<double> z;
  std::vector<double> p;
  std::vector<double> u;
  std::vector<double> T;
  /// Face mass flow rates (kg/s) carried between solver steps; empty when unknown.
  std::vector<double> face_mass_flow;

  std::size_t size() const { return z.size(); }
};

/// Throws ConfigError if array lengths differ or z is not strictly increasing.
void validate(const FieldState& state);

}  // namespace psm
