#include "psm/train/trainer.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "psm/core/errors.hpp"
#include "psm/train/losses.hpp"

namespace psm::train {

void TrainConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || std::abs(alpha + beta - 1.0) > 1e-12) {
    throw ConfigError("train: alpha and beta must be non-negative and sum to 1");
  }
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (batch_size == 0) throw ConfigError("train: batch size must be positive");
  if (beta > 0.0 && collocation_batch == 0) throw ConfigError("train: collocation batch must be positive");
}

Matrix sample_collocation(Rng& rng, std::size_t count, const Matrix& batch, const InputLayout& layout) {
  if (batch.rows == 0) throw ConfigError("collocation: empty measurement batch");
  Matrix out(count, batch.cols);
  for (std::size_t r = 0; r < count; ++r) {
    const double z = rng.uniform();
    const double t = rng.uniform();
    const std::size_t src = rng.index(batch.rows);
    std::copy_n(batch.ptr() + src * batch.cols, batch.cols, out.ptr() + r * batch.cols);
    out(r, InputLayout::z_col) = z;
    out(r, InputLayout::t_col) = t;
  }
  (void)layout;
  return out;
}

TrainResult train(const nn::Mlp& mlp, std::vector<double> params, const Dataset& data,
                  const PhysicsContext& ctx, const TrainConfig& cfg, const NoiseSpec& noise,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  noise.validate();
  if (data.size() == 0) throw ConfigError("train: empty dataset");
  if (params.size() != mlp.n_params()) throw ConfigError("train: parameter vector size mismatch");
  if (mlp.spec().input_dim != data.layout.input_dim()) {
    throw ConfigError("train: network input dimension does not match the dataset");
  }
  Rng shuffle_rng(derive_seed(cfg.seed, 1));
  Rng noise_rng(derive_seed(cfg.seed, 2));
  Rng colloc_rng(derive_seed(cfg.seed, 3));
  nn::Adam adam(cfg.adam, mlp.n_params());

  TrainResult res;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(mlp.n_params()), grad_p(mlp.n_params());
  Matrix g_out;
  nn::EvalTrace trace;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.index(i)]);
    }
    EpochMetrics m;
    m.epoch = epoch + 1;
    m.learning_rate = adam.learning_rate(epoch);
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      Matrix xb = gather_rows(data.inputs, idx);
      Matrix yb = gather_rows(data.targets, idx);
      add_noise(xb, yb, data.layout, noise, noise_rng);

      std::fill(grad.begin(), grad.end(), 0.0);
      mlp.forward(params, xb, 0, trace);
      const double lm = measurement_loss(trace.output, yb, &g_out);
      for (double& g : g_out.data) g *= cfg.alpha;
      mlp.backward(params, trace, g_out, grad);
      double lp = 0.0;
      if (cfg.beta > 0.0) {
        const Matrix xc = sample_collocation(colloc_rng, cfg.collocation_batch, xb, data.layout);
        lp = physics_loss(mlp, params, xc, ctx, &grad, cfg.beta).loss;
        ++res.physics_evaluations;
      }
      const double total = cfg.alpha * lm + cfg.beta * lp;
      if (!std::isfinite(total)) {
        throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                             ", batch " + std::to_string(n_batches + 1));
      }
      adam.step(params, grad, epoch);
      m.measurement += lm;
      m.physics += lp;
      m.total += total;
      ++n_batches;
    }
    m.measurement /= static_cast<double>(n_batches);
    m.physics /= static_cast<double>(n_batches);
    m.total /= static_cast<double>(n_batches);
    res.history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  res.params = std::move(params);
  res.adam_steps = adam.steps();
  res.adam_m = adam.m();
  res.adam_v = adam.v();
  return res;
}

}  // namespace psm::train
