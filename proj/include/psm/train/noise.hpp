#pragma once

#include "psm/core/matrix.hpp"
#include "psm/core/random.hpp"
#include "psm/train/dataset.hpp"

namespace psm::train {

enum class NoiseMode { none, homoscedastic, heteroscedastic };

struct NoiseSpec {
  NoiseMode mode = NoiseMode::none;
  double sigma = 0.0;  // homoscedastic standard deviation (scaled units)
  double xi = 0.0;     // heteroscedastic variance factor

  void validate() const;
};

/// Perturbs x0 input columns and targets in place (scaled units). Every entry gets
/// an independent draw; z, t and control columns are left untouched.
void add_noise(Matrix& inputs, Matrix& targets, const InputLayout& layout, const NoiseSpec& spec,
               Rng& rng);

/// Single value, for tests and tools.
double noisy(double x, const NoiseSpec& spec, Rng& rng);

}  // namespace psm::train
