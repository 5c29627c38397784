#include "psm/core/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psm/core/errors.hpp"

namespace psm {

double SourceRef::evaluate(std::span<const double> controls) const {
  if (!channel) return fixed_value;
  if (*channel >= controls.size()) throw ConfigError("source refers to a missing control channel");
  return sign * controls[*channel];
}

double ConstraintSchedule::bound_at(double t) const {
  double b = bounds.front();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (t + 1e-9 >= times[i]) b = bounds[i];
  }
  return b;
}

double ScenarioConfig::total_length() const {
  double L = 0.0;
  for (const auto& s : segments) L += s.length;
  return L;
}

std::size_t ScenarioConfig::segment_at(double z) const {
  double left = 0.0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const double right = left + segments[s].length;
    if (z < right) return s;
    left = right;
  }
  return segments.size() - 1;
}

double ScenarioConfig::source_at(double z, std::span<const double> v) const {
  const auto& seg = segments[segment_at(z)];
  return seg.source ? seg.source->evaluate(v) : 0.0;
}

std::vector<double> ScenarioConfig::lower_bounds() const {
  std::vector<double> out;
  for (const auto& c : controls) out.push_back(c.min);
  return out;
}

std::vector<double> ScenarioConfig::upper_bounds() const {
  std::vector<double> out;
  for (const auto& c : controls) out.push_back(c.max);
  return out;
}

void validate(const ScenarioConfig& c) {
  if (c.segments.empty()) throw ConfigError("scenario: no segments");
  for (std::size_t i = 0; i < c.segments.size(); ++i) {
    const auto& s = c.segments[i];
    const std::string at = "scenario: segment " + std::to_string(i) + ": ";
    if (!(s.length > 0.0)) throw ConfigError(at + "length must be positive");
    if (!(s.flow_area > 0.0)) throw ConfigError(at + "flow_area must be positive");
    if (!(s.hydraulic_diameter > 0.0)) throw ConfigError(at + "hydraulic_diameter must be positive");
    if (s.n_elements < 1) throw ConfigError(at + "n_elements must be at least 1");
    if (!(s.friction_factor >= 0.0)) throw ConfigError(at + "friction_factor must be non-negative");
    if (!std::isfinite(s.gravity_component)) throw ConfigError(at + "gravity_component not finite");
    if (s.source && s.source->channel && *s.source->channel >= c.controls.size()) {
      throw ConfigError(at + "source channel out of range");
    }
  }
  if (c.controls.empty()) throw ConfigError("scenario: at least one control channel required");
  for (const auto& ch : c.controls) {
    if (!(ch.max > ch.min)) throw ConfigError("scenario: control '" + ch.name + "' needs min < max");
  }
  if (!(c.delta_t > 0.0)) throw ConfigError("scenario: delta_t must be positive");
  if (!(c.episode_duration >= 0.0)) throw ConfigError("scenario: episode_duration must be >= 0");
  const double L = c.total_length();
  for (double z : c.sensor_stations) {
    if (z < 0.0 || z > L) throw ConfigError("scenario: sensor station outside [0, L]");
  }
  if (c.sensor_stations.empty()) throw ConfigError("scenario: no sensor stations");
  if (!std::is_sorted(c.sensor_stations.begin(), c.sensor_stations.end())) {
    throw ConfigError("scenario: sensor stations must be ordered");
  }
  const auto& tp = c.trajectory;
  if (!(tp.hold_min >= 0.0 && tp.hold_max >= tp.hold_min)) {
    throw ConfigError("scenario: invalid hold range");
  }
  if (!(tp.ramp_rate_min > 0.0 && tp.ramp_rate_max >= tp.ramp_rate_min)) {
    throw ConfigError("scenario: invalid ramp rate range");
  }
  if (c.kind == ScenarioKind::heated_channel) {
    if (c.boundary.inlet_velocity_channel >= c.controls.size() ||
        c.boundary.inlet_temperature_channel >= c.controls.size()) {
      throw ConfigError("scenario: inlet channel index out of range");
    }
    if (!(c.controls[c.boundary.inlet_velocity_channel].min > 0.0)) {
      throw ConfigError("scenario: inlet velocity must stay positive");
    }
  } else if (c.boundary.pump_channel >= c.controls.size()) {
    throw ConfigError("scenario: pump channel index out of range");
  }
  for (const auto& k : c.constraints) {
    if (k.times.empty() || k.times.size() != k.bounds.size()) {
      throw ConfigError("scenario: constraint schedule needs matching times/bounds");
    }
    if (k.times.front() != 0.0) throw ConfigError("scenario: constraint schedule must start at t = 0");
    if (k.field != 'p' && k.field != 'u' && k.field != 'T') {
      throw ConfigError("scenario: constraint field must be p, u or T");
    }
    if (std::find(c.sensor_stations.begin(), c.sensor_stations.end(), k.station_z) ==
        c.sensor_stations.end()) {
      throw ConfigError("scenario: constraint must sit on a sensor station");
    }
  }
  double t_hot = 0.0;
  for (const auto& ch : c.controls) {
    if (ch.unit == "K") t_hot = std::max(t_hot, ch.max);
  }
  validate(c.fluid, std::max({t_hot, c.boundary.initial_temperature, 1000.0}));
}

namespace {

PipeSegment pipe(std::string name, double length, int n_elements) {
  PipeSegment s;
  s.name = std::move(name);
  s.length = length;
  s.n_elements = n_elements;
  return s;
}

}  // namespace

ScenarioConfig heated_channel_preset() {
  ScenarioConfig c;
  c.name = "heated_channel";
  c.kind = ScenarioKind::heated_channel;
  c.segments = {pipe("pipe0", 1.0, 10), pipe("heater", 0.8, 10), pipe("pipe2", 1.0, 10)};
  c.segments[1].source = SourceRef{std::nullopt, 50.0e6, 1.0};
  c.boundary.reference_pressure = 135.6e3;
  c.boundary.inlet_velocity_channel = 0;
  c.boundary.inlet_temperature_channel = 1;
  c.controls = {{"u_in", "m/s", 0.549, 0.749},
                {"T_in", "K", celsius_to_kelvin(531.5), celsius_to_kelvin(611.5)}};
  c.sensor_stations = {0.25, 0.5, 0.75, 2.05, 2.3, 2.55};
  c.delta_t = 5.0;
  c.episode_duration = 200.0;
  ConstraintSchedule cap;
  cap.station_z = 2.3;
  cap.field = 'T';
  cap.upper = true;
  cap.times = {0.0, 100.0};
  cap.bounds = {celsius_to_kelvin(605.0), celsius_to_kelvin(595.0)};
  c.constraints = {cap};
  return c;
}

ScenarioConfig loop_preset() {
  ScenarioConfig c;
  c.name = "loop";
  c.kind = ScenarioKind::loop;
  c.segments = {pipe("heater", 1.0, 10), pipe("pipe1", 2.0, 20), pipe("pipe2", 1.0, 10),
                pipe("pipe3", 1.0, 10),  pipe("cooler", 1.0, 10), pipe("pipe5", 2.0, 20)};
  c.segments[0].source = SourceRef{std::size_t{0}, 0.0, 1.0};
  c.segments[4].source = SourceRef{std::size_t{0}, 0.0, -1.0};
  c.boundary.reference_pressure = 100.0e3;
  c.boundary.pump_channel = 1;
  c.boundary.initial_temperature = celsius_to_kelvin(571.5);
  c.controls = {{"q_in", "W/m^3", 45.0e6, 55.0e6}, {"dp_pump", "Pa", 1125.0, 1875.0}};
  c.sensor_stations = {0.5, 2.0, 3.5, 4.5, 5.5, 7.0};
  c.delta_t = 5.0;
  c.episode_duration = 200.0;
  return c;
}

ScenarioConfig inject_degradation(const ScenarioConfig& config, std::size_t segment_index,
                                  double friction_multiplier) {
  if (segment_index >= config.segments.size()) {
    throw ConfigError("degradation: segment index out of range");
  }
  if (!(friction_multiplier > 0.0)) throw ConfigError("degradation: multiplier must be positive");
  ScenarioConfig out = config;
  out.segments[segment_index].friction_factor *= friction_multiplier;
  return out;
}

}  // namespace psm
