#pragma once

#include <vector>

#include "psm/train/dataset.hpp"
#include "psm/train/model.hpp"
#include "psm/train/trainer.hpp"

namespace psm::diag {

struct TwinConfig {
  int epochs = 50;
  double lr_factor = 0.1;  // relative to the nominal base rate
  std::size_t batch_size = 512;
  std::uint64_t seed = 0;
  nn::AdamConfig adam;
};

struct TwinResult {
  std::vector<double> params;
  std::vector<train::EpochMetrics> history;
};

/// Copy of the nominal parameters fine-tuned on post-latch data with the
/// measurement loss only. An empty dataset returns the nominal parameters.
/// Throws NumericalError when an epoch loss exceeds 10x the first epoch's.
TwinResult transfer_learn_twin(const train::Model& nominal, const train::Dataset& post_latch,
                               const TwinConfig& config);

/// Mean squared error (scaled units) of the model over the t = delta_t rows.
double measurement_mse(const train::Model& model, const train::Dataset& data);

}  // namespace psm::diag
