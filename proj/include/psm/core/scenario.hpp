#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psm/core/fluid.hpp"

namespace psm {

enum class ScenarioKind { heated_channel, loop };

/// Volumetric heat source attached to a segment: either a fixed value or
/// `sign * controls[channel]`.
struct SourceRef {
  std::optional<std::size_t> channel;
  double fixed_value = 0.0;  // W/m^3, used when channel is empty
  double sign = 1.0;

  double evaluate(std::span<const double> controls) const;
};

struct PipeSegment {
  std::string name;
  double length = 1.0;                   // m
  double flow_area = 0.449;              // m^2
  double hydraulic_diameter = 2.972e-3;  // m
  int n_elements = 10;
  double friction_factor = 0.001;
  std::optional<SourceRef> source;
  double gravity_component = 0.0;  // m/s^2 along the flow axis
};

/// One actuated input. Temperatures are stored in kelvin.
struct ControlChannel {
  std::string name;
  std::string unit;
  double min = 0.0;
  double max = 1.0;
};

/// Heated channel: Dirichlet u,T at the inlet face, fixed absolute pressure at the outlet.
/// Loop: ideal pump pressure jump at the face between the last and first cells,
/// reference pressure pinned at the pump outlet (z = 0).
struct BoundarySpec {
  double reference_pressure = 135.6e3;  // Pa absolute (p_out or p_loop)
  std::size_t inlet_velocity_channel = 0;
  std::size_t inlet_temperature_channel = 1;
  std::size_t pump_channel = 1;
  double initial_temperature = 844.65;  // K, loop fill temperature
};

struct TrajectoryParams {
  double hold_min = 10.0;       // s
  double hold_max = 40.0;       // s
  double ramp_rate_min = 0.01;  // fraction of channel range per second
  double ramp_rate_max = 0.05;
};

/// Piecewise-constant limit on one measured field at one sensor station.
struct ConstraintSchedule {
  double station_z = 0.0;
  char field = 'T';     // 'p', 'u' or 'T'
  bool upper = true;    // true: field <= bound, false: field >= bound
  std::vector<double> times;   // s, change instants, first must be 0
  std::vector<double> bounds;  // same length as times, SI units (K for T)

  double bound_at(double t) const;
};

struct ScenarioConfig {
  std::string name;
  ScenarioKind kind = ScenarioKind::heated_channel;
  FluidProps fluid;
  std::vector<PipeSegment> segments;
  BoundarySpec boundary;
  std::vector<ControlChannel> controls;
  std::vector<double> sensor_stations;
  double delta_t = 5.0;
  double episode_duration = 200.0;
  TrajectoryParams trajectory;
  std::vector<ConstraintSchedule> constraints;

  double total_length() const;
  std::size_t n_controls() const { return controls.size(); }
  std::size_t n_stations() const { return sensor_stations.size(); }
  /// Index of the segment containing z (left-closed, last segment right-closed).
  std::size_t segment_at(double z) const;
  double source_at(double z, std::span<const double> controls) const;
  std::vector<double> lower_bounds() const;
  std::vector<double> upper_bounds() const;
};

/// Throws ConfigError on any violated invariant.
void validate(const ScenarioConfig& config);

/// Presets matching the two reference rigs: three pipes in series with a
/// heated middle section, and a six-pipe pumped loop with synchronized source and sink.
ScenarioConfig heated_channel_preset();
ScenarioConfig loop_preset();

/// Returns a copy with segment `segment_index`'s friction factor multiplied.
ScenarioConfig inject_degradation(const ScenarioConfig& config, std::size_t segment_index,
                                  double friction_multiplier);

}  // namespace psm
