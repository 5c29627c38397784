#pragma once

#include <filesystem>
#include <vector>

#include "psm/diag/residuals.hpp"

namespace psm::diag {

struct CurveSignature {
  std::vector<double> nominal;
  std::vector<double> twin;
  std::vector<double> difference;  // nominal - twin
  std::vector<double> scaled;      // difference min-max mapped to [-1, 1]
  double min = 0.0;                // extrema of the difference before scaling
  double max = 0.0;
};

struct ResidualSignature {
  std::vector<double> z;
  CurveSignature mass;
  CurveSignature momentum;
  CurveSignature energy;
};

/// Throws ConfigError when the grids differ.
ResidualSignature signature(const ResidualCurves& nominal, const ResidualCurves& twin);

/// max |r| over z in [lo, hi] divided by max |r| outside it (infinity when the
/// outside is identically zero, 0 when both are).
double localization_ratio(const std::vector<double>& z, const std::vector<double>& r, double lo,
                          double hi);

/// Columns: z, eq, r_nom, r_m, r, scaled_r.
void write_signature_csv(const ResidualSignature& sig, const std::filesystem::path& path);

}  // namespace psm::diag
