#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "psm/nn/adam.hpp"
#include "psm/nn/mlp.hpp"

namespace psm::nn {

struct Checkpoint {
  MlpSpec spec;
  std::vector<double> params;
  bool has_moments = false;
  std::uint64_t adam_steps = 0;
  std::vector<double> m;
  std::vector<double> v;
};

/// Binary "PSMW" v1: magic, u16 version, u64 spec fingerprint, spec dimensions,
/// u64 parameter count, f64 parameters, u8 moment flag [+ u64 steps, m, v].
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace psm::nn
