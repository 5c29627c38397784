#include "psm/core/errors.hpp"
#include "psm/core/fluid.hpp"

#include <cmath>
#include <string>

namespace psm {

void validate(const FluidProps& props, double t_max) {
  if (!(props.rho_a > 0.0)) throw ConfigError("fluid: rho_a must be positive");
  if (!(props.cp > 0.0)) throw ConfigError("fluid: cp must be positive");
  if (!std::isfinite(props.rho_b)) throw ConfigError("fluid: rho_b must be finite");
  const double rho_hot = density(props, t_max);
  if (!(rho_hot > 0.0)) {
    throw ConfigError("fluid: density non-positive at T = " + std::to_string(t_max) + " K");
  }
}

}  // namespace psm
