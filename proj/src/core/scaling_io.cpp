#include "psm/core/scaling_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psm/core/errors.hpp"

namespace psm {

using nlohmann::json;

namespace {

json range(const FieldRange& r) { return json::array({r.min, r.max}); }

FieldRange range(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("scaling: range must be [min, max]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string dump_scaling(const ScalingSpec& s) {
  json j;
  j["z_max"] = s.z_max;
  j["t_max"] = s.t_max;
  j["p"] = range(s.p);
  j["u"] = range(s.u);
  j["T"] = range(s.T);
  j["rho"] = range(s.rho);
  j["controls"] = json::array();
  for (const auto& c : s.controls) j["controls"].push_back(range(c));
  return j.dump(2);
}

ScalingSpec parse_scaling(const std::string& text) {
  ScalingSpec s;
  try {
    const json j = json::parse(text);
    s.z_max = j.at("z_max").get<double>();
    s.t_max = j.at("t_max").get<double>();
    s.p = range(j.at("p"));
    s.u = range(j.at("u"));
    s.T = range(j.at("T"));
    s.rho = range(j.at("rho"));
    for (const auto& c : j.at("controls")) s.controls.push_back(range(c));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scaling: ") + e.what());
  }
  s.validate();
  return s;
}

void save_scaling(const ScalingSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << dump_scaling(spec) << '\n';
}

ScalingSpec load_scaling(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scaling(ss.str());
}

}  // namespace psm
