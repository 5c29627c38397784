#include "psm/core/scaling.hpp"

#include <string>

#include "psm/core/errors.hpp"

namespace psm {

namespace {

void check_range(const FieldRange& r, const char* name) {
  if (!(r.max > r.min)) {
    throw ConfigError(std::string("scaling: degenerate range for ") + name +
                      " (max must exceed min)");
  }
}

}  // namespace

void ScalingSpec::validate() const {
  if (!(z_max > 0.0)) throw ConfigError("scaling: z_max must be positive");
  if (!(t_max > 0.0)) throw ConfigError("scaling: t_max must be positive");
  check_range(p, "p");
  check_range(u, "u");
  check_range(T, "T");
  check_range(rho, "rho");
  for (const auto& c : controls) check_range(c, "control");
}

const FieldRange& ScalingSpec::field(int index) const {
  switch (index) {
    case 0: return p;
    case 1: return u;
    case 2: return T;
    default: throw ConfigError("scaling: field index out of range");
  }
}

FieldState scale_state(const ScalingSpec& spec, const FieldState& s) {
  spec.validate();
  FieldState out;
  out.z.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.z.push_back(s.z[i] / spec.z_max);
    out.p.push_back(spec.p.scale(s.p[i]));
    out.u.push_back(spec.u.scale(s.u[i]));
    out.T.push_back(spec.T.scale(s.T[i]));
  }
  return out;
}

FieldState unscale_state(const ScalingSpec& spec, const FieldState& s) {
  spec.validate();
  FieldState out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.z.push_back(s.z[i] * spec.z_max);
    out.p.push_back(spec.p.unscale(s.p[i]));
    out.u.push_back(spec.u.unscale(s.u[i]));
    out.T.push_back(spec.T.unscale(s.T[i]));
  }
  return out;
}

std::vector<double> scale_controls(const ScalingSpec& spec, std::span<const double> v) {
  if (v.size() != spec.controls.size()) throw ConfigError("scaling: control count mismatch");
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    check_range(spec.controls[j], "control");
    out[j] = spec.controls[j].scale(v[j]);
  }
  return out;
}

std::vector<double> unscale_controls(const ScalingSpec& spec, std::span<const double> v) {
  if (v.size() != spec.controls.size()) throw ConfigError("scaling: control count mismatch");
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = spec.controls[j].unscale(v[j]);
  return out;
}

std::vector<double> scale_sensors(const ScalingSpec& spec, std::span<const double> x) {
  if (x.size() % 3 != 0) throw ConfigError("scaling: sensor vector not a multiple of 3");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = spec.field(static_cast<int>(i % 3)).scale(x[i]);
  return out;
}

std::vector<double> unscale_sensors(const ScalingSpec& spec, std::span<const double> x) {
  if (x.size() % 3 != 0) throw ConfigError("scaling: sensor vector not a multiple of 3");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = spec.field(static_cast<int>(i % 3)).unscale(x[i]);
  }
  return out;
}

FieldRange with_margin(double lo, double hi, double margin) {
  const double w = hi - lo;
  return {lo - margin * w, hi + margin * w};
}

}  // namespace psm
