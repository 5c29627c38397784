#pragma once

#include <cstdint>
#include <vector>

namespace psm::nn {

struct AdamConfig {
  double lr0 = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay = 0.5;        // multiplier applied every `decay_every` epochs
  int decay_every = 50;
};

class Adam {
 public:
  Adam(AdamConfig config, std::size_t n_params);

  /// lr0 * decay^floor(epoch / decay_every), epochs counted from 0.
  double learning_rate(int epoch) const;

  /// One update. Throws NumericalError on non-finite gradients (params untouched).
  void step(std::vector<double>& params, const std::vector<double>& grad, int epoch);

  const AdamConfig& config() const { return config_; }
  std::uint64_t steps() const { return t_; }
  std::vector<double>& m() { return m_; }
  std::vector<double>& v() { return v_; }
  const std::vector<double>& m() const { return m_; }
  const std::vector<double>& v() const { return v_; }
  void restore(std::uint64_t steps, std::vector<double> m, std::vector<double> v);

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

}  // namespace psm::nn
