#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "psm/nn/adam.hpp"
#include "psm/nn/mlp.hpp"
#include "psm/train/dataset.hpp"
#include "psm/train/noise.hpp"
#include "psm/train/physics.hpp"

namespace psm::train {

struct TrainConfig {
  double alpha = 0.5;
  double beta = 0.5;
  int epochs = 500;
  std::size_t batch_size = 2048;
  std::size_t collocation_batch = 2048;
  std::uint64_t seed = 1;
  nn::AdamConfig adam;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double measurement = 0.0;  // mean over the epoch's batches
  double physics = 0.0;
  double total = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  std::vector<double> params;
  std::vector<EpochMetrics> history;
  std::uint64_t physics_evaluations = 0;
  std::uint64_t adam_steps = 0;
  std::vector<double> adam_m;
  std::vector<double> adam_v;
};

/// Draws B collocation rows: z* ~ U[0, 1], t* ~ U[0, 1], (v, x0) copied from a
/// uniformly chosen row of the measurement mini-batch.
Matrix sample_collocation(Rng& rng, std::size_t count, const Matrix& batch_inputs,
                          const InputLayout& layout);

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Mini-batch training of L = alpha L_m + beta L_p. Parameters start from
/// `initial_params` (typically Mlp::init_params). With beta = 0 the physics loss
/// is never evaluated. Random streams for shuffling, noise and collocation are
/// derived from config.seed independently.
TrainResult train(const nn::Mlp& mlp, std::vector<double> initial_params, const Dataset& data,
                  const PhysicsContext& ctx, const TrainConfig& config, const NoiseSpec& noise,
                  const EpochCallback& on_epoch = {});

}  // namespace psm::train
