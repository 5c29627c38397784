#include "psm/nn/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "psm/core/errors.hpp"
#include "psm/simd/kernels.hpp"

namespace psm::nn {

Adam::Adam(AdamConfig config, std::size_t n_params)
    : config_(config), m_(n_params, 0.0), v_(n_params, 0.0) {
  if (!(config_.lr0 > 0.0) || config_.decay_every < 1) throw ConfigError("adam: invalid schedule");
}

double Adam::learning_rate(int epoch) const {
  return config_.lr0 * std::pow(config_.decay, std::floor(static_cast<double>(epoch) / config_.decay_every));
}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad, int epoch) {
  if (grad.size() != params.size() || params.size() != m_.size()) {
    throw std::invalid_argument("adam: gradient shape does not match parameters");
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw NumericalError("adam: non-finite gradient entry " + std::to_string(i));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  simd::active().adam_update(params.size(), params.data(), grad.data(), m_.data(), v_.data(),
                             learning_rate(epoch), config_.beta1, config_.beta2, config_.eps, bc1, bc2);
}

void Adam::restore(std::uint64_t steps, std::vector<double> m, std::vector<double> v) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw std::invalid_argument("adam: restored moments have the wrong size");
  }
  t_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace psm::nn
