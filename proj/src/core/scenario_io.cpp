#include "psm/core/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psm/core/digest.hpp"
#include "psm/core/errors.hpp"

namespace psm {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: bad value for '") + key + "': " + e.what());
  }
}

// Temperatures are either a bare number in kelvin or {"value": x, "unit": "C"|"K"}.
double temperature(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_object()) {
    const double v = j.at("value").get<double>();
    const std::string unit = get_or<std::string>(j, "unit", "K");
    if (unit == "C") return celsius_to_kelvin(v);
    if (unit == "K") return v;
    throw ConfigError("scenario: temperature unit must be C or K, got " + unit);
  }
  throw ConfigError("scenario: temperature must be a number or {value, unit}");
}

ScenarioKind parse_kind(const std::string& s) {
  if (s == "heated_channel") return ScenarioKind::heated_channel;
  if (s == "loop") return ScenarioKind::loop;
  throw ConfigError("scenario: unknown kind '" + s + "'");
}

ScenarioConfig from_json(const json& j) {
  ScenarioConfig c;
  c.name = get_or<std::string>(j, "name", "scenario");
  c.kind = parse_kind(j.at("kind").get<std::string>());
  if (j.contains("fluid")) {
    const auto& f = j["fluid"];
    c.fluid.rho_a = get_or(f, "rho_a", c.fluid.rho_a);
    c.fluid.rho_b = get_or(f, "rho_b", c.fluid.rho_b);
    c.fluid.cp = get_or(f, "cp", c.fluid.cp);
  }
  for (const auto& s : j.at("segments")) {
    PipeSegment seg;
    seg.name = get_or<std::string>(s, "name", "");
    seg.length = s.at("length").get<double>();
    seg.flow_area = get_or(s, "flow_area", seg.flow_area);
    seg.hydraulic_diameter = get_or(s, "hydraulic_diameter", seg.hydraulic_diameter);
    seg.n_elements = get_or(s, "n_elements", seg.n_elements);
    seg.friction_factor = get_or(s, "friction_factor", seg.friction_factor);
    seg.gravity_component = get_or(s, "gravity_component", seg.gravity_component);
    if (s.contains("source") && !s["source"].is_null()) {
      const auto& src = s["source"];
      SourceRef ref;
      if (src.contains("channel")) ref.channel = src["channel"].get<std::size_t>();
      ref.fixed_value = get_or(src, "value", 0.0);
      ref.sign = get_or(src, "sign", 1.0);
      seg.source = ref;
    }
    c.segments.push_back(seg);
  }
  if (j.contains("boundary")) {
    const auto& b = j["boundary"];
    c.boundary.reference_pressure = get_or(b, "reference_pressure", c.boundary.reference_pressure);
    c.boundary.inlet_velocity_channel =
        get_or(b, "inlet_velocity_channel", c.boundary.inlet_velocity_channel);
    c.boundary.inlet_temperature_channel =
        get_or(b, "inlet_temperature_channel", c.boundary.inlet_temperature_channel);
    c.boundary.pump_channel = get_or(b, "pump_channel", c.boundary.pump_channel);
    if (b.contains("initial_temperature")) {
      c.boundary.initial_temperature = temperature(b["initial_temperature"]);
    }
  }
  for (const auto& ch : j.at("controls")) {
    ControlChannel cc;
    cc.name = ch.at("name").get<std::string>();
    cc.unit = get_or<std::string>(ch, "unit", "");
    cc.min = ch.at("min").get<double>();
    cc.max = ch.at("max").get<double>();
    if (cc.unit == "C") {
      cc.min = celsius_to_kelvin(cc.min);
      cc.max = celsius_to_kelvin(cc.max);
      cc.unit = "K";
    }
    c.controls.push_back(cc);
  }
  c.sensor_stations = j.at("sensor_stations").get<std::vector<double>>();
  c.delta_t = get_or(j, "delta_t", c.delta_t);
  c.episode_duration = get_or(j, "episode_duration", c.episode_duration);
  if (j.contains("trajectory")) {
    const auto& t = j["trajectory"];
    c.trajectory.hold_min = get_or(t, "hold_min", c.trajectory.hold_min);
    c.trajectory.hold_max = get_or(t, "hold_max", c.trajectory.hold_max);
    c.trajectory.ramp_rate_min = get_or(t, "ramp_rate_min", c.trajectory.ramp_rate_min);
    c.trajectory.ramp_rate_max = get_or(t, "ramp_rate_max", c.trajectory.ramp_rate_max);
  }
  if (j.contains("constraints")) {
    for (const auto& k : j["constraints"]) {
      ConstraintSchedule cs;
      cs.station_z = k.at("station_z").get<double>();
      const std::string field = k.at("field").get<std::string>();
      if (field.size() != 1) throw ConfigError("scenario: constraint field must be p, u or T");
      cs.field = field[0];
      const std::string sense = get_or<std::string>(k, "sense", "upper");
      if (sense != "upper" && sense != "lower") {
        throw ConfigError("scenario: constraint sense must be upper or lower");
      }
      cs.upper = sense == "upper";
      cs.times = k.at("times").get<std::vector<double>>();
      cs.bounds = k.at("bounds").get<std::vector<double>>();
      if (get_or<std::string>(k, "unit", "") == "C") {
        for (double& b : cs.bounds) b = celsius_to_kelvin(b);
      }
      c.constraints.push_back(cs);
    }
  }
  validate(c);
  return c;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["kind"] = c.kind == ScenarioKind::loop ? "loop" : "heated_channel";
  j["fluid"] = {{"rho_a", c.fluid.rho_a}, {"rho_b", c.fluid.rho_b}, {"cp", c.fluid.cp}};
  j["segments"] = json::array();
  for (const auto& s : c.segments) {
    json js = {{"name", s.name},
               {"length", s.length},
               {"flow_area", s.flow_area},
               {"hydraulic_diameter", s.hydraulic_diameter},
               {"n_elements", s.n_elements},
               {"friction_factor", s.friction_factor},
               {"gravity_component", s.gravity_component}};
    if (s.source) {
      json src;
      if (s.source->channel) {
        src["channel"] = *s.source->channel;
        src["sign"] = s.source->sign;
      } else {
        src["value"] = s.source->fixed_value;
      }
      js["source"] = src;
    }
    j["segments"].push_back(js);
  }
  j["boundary"] = {{"reference_pressure", c.boundary.reference_pressure},
                   {"inlet_velocity_channel", c.boundary.inlet_velocity_channel},
                   {"inlet_temperature_channel", c.boundary.inlet_temperature_channel},
                   {"pump_channel", c.boundary.pump_channel},
                   {"initial_temperature", c.boundary.initial_temperature}};
  j["controls"] = json::array();
  for (const auto& ch : c.controls) {
    j["controls"].push_back({{"name", ch.name}, {"unit", ch.unit}, {"min", ch.min}, {"max", ch.max}});
  }
  j["sensor_stations"] = c.sensor_stations;
  j["delta_t"] = c.delta_t;
  j["episode_duration"] = c.episode_duration;
  j["trajectory"] = {{"hold_min", c.trajectory.hold_min},
                     {"hold_max", c.trajectory.hold_max},
                     {"ramp_rate_min", c.trajectory.ramp_rate_min},
                     {"ramp_rate_max", c.trajectory.ramp_rate_max}};
  j["constraints"] = json::array();
  for (const auto& k : c.constraints) {
    j["constraints"].push_back({{"station_z", k.station_z},
                                {"field", std::string(1, k.field)},
                                {"sense", k.upper ? "upper" : "lower"},
                                {"times", k.times},
                                {"bounds", k.bounds}});
  }
  return j;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    return from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string dump_scenario(const ScenarioConfig& config) { return to_json(config).dump(2); }

void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file " + path.string());
  out << dump_scenario(config) << '\n';
}

std::uint64_t scenario_hash(const ScenarioConfig& config) {
  return fnv1a64(to_json(config).dump());
}

}  // namespace psm
