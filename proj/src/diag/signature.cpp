#include "psm/diag/signature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "psm/core/errors.hpp"

namespace psm::diag {

namespace {

CurveSignature make_curve(const std::vector<double>& nom, const std::vector<double>& twin) {
  CurveSignature c;
  c.nominal = nom;
  c.twin = twin;
  c.difference.resize(nom.size());
  for (std::size_t i = 0; i < nom.size(); ++i) c.difference[i] = nom[i] - twin[i];
  c.scaled.assign(nom.size(), 0.0);
  if (nom.empty()) return c;
  const auto [lo, hi] = std::minmax_element(c.difference.begin(), c.difference.end());
  c.min = *lo;
  c.max = *hi;
  const double span = c.max - c.min;
  if (span > 0.0) {
    for (std::size_t i = 0; i < nom.size(); ++i) {
      c.scaled[i] = std::clamp(2.0 * (c.difference[i] - c.min) / span - 1.0, -1.0, 1.0);
    }
  }
  return c;
}

}  // namespace

ResidualSignature signature(const ResidualCurves& nom, const ResidualCurves& twin) {
  if (nom.z != twin.z || nom.mass.size() != nom.z.size() || twin.mass.size() != twin.z.size()) {
    throw ConfigError("signature: residual curves are on different grids");
  }
  ResidualSignature s;
  s.z = nom.z;
  s.mass = make_curve(nom.mass, twin.mass);
  s.momentum = make_curve(nom.momentum, twin.momentum);
  s.energy = make_curve(nom.energy, twin.energy);
  return s;
}

double localization_ratio(const std::vector<double>& z, const std::vector<double>& r, double lo,
                          double hi) {
  double inside = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < z.size() && i < r.size(); ++i) {
    double& m = (z[i] >= lo && z[i] <= hi) ? inside : outside;
    m = std::max(m, std::abs(r[i]));
  }
  if (outside == 0.0) return inside == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return inside / outside;
}

void write_signature_csv(const ResidualSignature& sig, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(12);
  out << "z,eq,r_nom,r_m,r,scaled_r\n";
  const std::pair<const char*, const CurveSignature*> curves[] = {
      {"mass", &sig.mass}, {"momentum", &sig.momentum}, {"energy", &sig.energy}};
  for (const auto& [name, c] : curves) {
    for (std::size_t i = 0; i < sig.z.size(); ++i) {
      out << sig.z[i] << ',' << name << ',' << c->nominal[i] << ',' << c->twin[i] << ','
          << c->difference[i] << ',' << c->scaled[i] << '\n';
    }
  }
}

}  // namespace psm::diag
