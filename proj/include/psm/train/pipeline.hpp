#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "psm/core/scenario.hpp"
#include "psm/solver/record.hpp"
#include "psm/train/model.hpp"
#include "psm/train/noise.hpp"
#include "psm/train/trainer.hpp"

namespace psm::train {

struct Corpus {
  std::vector<solver::SimulationRecord> train;
  std::vector<solver::SimulationRecord> test;
};

/// n_train + n_test episodes from one trajectory seed; the first n_train train.
Corpus make_corpus(const ScenarioConfig& scenario, std::uint64_t seed, std::size_t n_train,
                   std::size_t n_test, std::size_t workers = 1);

struct FitOptions {
  std::size_t head_width = 64;
  std::size_t head_depth = 3;
  std::size_t inter_width = 32;
  std::size_t tail_width = 32;
  TrainConfig train;
  NoiseSpec noise;
};

/// Widths (64, 32, 32), 200 epochs, batch 512.
FitOptions desk_preset();
/// Widths (200, 100, 100), 500 epochs, batch 2048.
FitOptions full_preset();

struct Fitted {
  Model model;
  std::vector<EpochMetrics> history;
  std::size_t physics_evaluations = 0;
};

/// Scaling from the training records, dataset assembly, initialization from
/// derive_seed(train.seed, 0) and training.
Fitted fit_model(const ScenarioConfig& scenario, const std::vector<solver::SimulationRecord>& records,
                 const FitOptions& options, const EpochCallback& on_epoch = {});

/// epoch,L_m,L_p,L_sigma,learning_rate
void write_metrics_csv(const std::vector<EpochMetrics>& history, const std::filesystem::path& path);
std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path);

}  // namespace psm::train
