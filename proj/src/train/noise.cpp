#include "psm/train/noise.hpp"

#include <cmath>

#include "psm/core/errors.hpp"

namespace psm::train {

void NoiseSpec::validate() const {
  if (!(sigma >= 0.0) || !(xi >= 0.0)) throw ConfigError("noise: sigma and xi must be >= 0");
}

double noisy(double x, const NoiseSpec& spec, Rng& rng) {
  switch (spec.mode) {
    case NoiseMode::none: return x;
    case NoiseMode::homoscedastic: return x + spec.sigma * rng.normal();
    case NoiseMode::heteroscedastic: return x + std::sqrt(std::abs(x) * spec.xi) * rng.normal();
  }
  return x;
}

void add_noise(Matrix& inputs, Matrix& targets, const InputLayout& layout, const NoiseSpec& spec,
               Rng& rng) {
  spec.validate();
  if (spec.mode == NoiseMode::none) return;
  const std::size_t c0 = layout.x0_col();
  const std::size_t c1 = c0 + layout.x0_size();
  for (std::size_t r = 0; r < inputs.rows; ++r) {
    for (std::size_t c = c0; c < c1; ++c) inputs(r, c) = noisy(inputs(r, c), spec, rng);
    for (std::size_t c = 0; c < targets.cols; ++c) targets(r, c) = noisy(targets(r, c), spec, rng);
  }
}

}  // namespace psm::train
