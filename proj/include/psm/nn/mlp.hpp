#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "psm/core/matrix.hpp"

namespace psm::nn {

enum class Activation { tanh, identity };

/// Head (dense stack) -> intermediate layer -> three tails (p, u, T), one scalar
/// output per tail. Hidden layers use `activation`, outputs are linear.
struct MlpSpec {
  std::size_t input_dim = 0;
  std::size_t head_width = 200;
  std::size_t head_depth = 3;
  std::size_t inter_width = 100;
  std::size_t tail_width = 100;
  Activation activation = Activation::tanh;

  void validate() const;
  std::uint64_t fingerprint() const;
};

/// Dense layer view into the flat parameter vector. Weights are stored
/// transposed (n_in x n_out, row-major) so a batch multiplies as X * Wt.
struct DenseLayer {
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  std::size_t w_offset = 0;
  std::size_t b_offset = 0;
  bool hidden = true;
};

/// Cached activations for the reverse sweep. Rows are stacked in (1 + K) blocks
/// of N: block 0 holds the primal pass, block d the forward-mode tangent along
/// direction d. Biases enter the primal block only.
struct EvalTrace {
  std::size_t n = 0;  // samples
  std::size_t k = 0;  // tangent directions
  std::vector<Matrix> inputs;       // input to each hidden layer
  std::vector<Matrix> pre;          // pre-activations (tangent blocks needed for reverse)
  std::vector<Matrix> activations;  // post-activation output of each hidden layer
  Matrix output;                    // (1 + K) N x 3
};

class Mlp {
 public:
  explicit Mlp(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  std::size_t n_params() const { return n_params_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  /// Output layer: tail b reads hidden columns [b * tail_width, (b + 1) * tail_width).
  std::size_t out_w_offset() const { return out_w_offset_; }
  std::size_t out_b_offset() const { return out_b_offset_; }

  /// Fan-in scaled uniform weights U(-sqrt(3 / fan_in), +sqrt(3 / fan_in)); zero biases.
  std::vector<double> init_params(std::uint64_t seed) const;

  /// Plain forward pass, N x input_dim -> N x 3.
  Matrix forward(const std::vector<double>& params, const Matrix& x) const;

  /// Forward pass with K tangent directions. `x_aug` has (1 + K) N rows: the inputs
  /// followed by K blocks of input-space directions.
  void forward(const std::vector<double>& params, const Matrix& x_aug, std::size_t k,
               EvalTrace& trace) const;

  /// Reverse sweep of a traced forward pass. `g_out` is dLoss/d(trace.output);
  /// parameter gradients are accumulated into `grad`. When `grad_input` is given it
  /// receives dLoss/d(x_aug).
  void backward(const std::vector<double>& params, const EvalTrace& trace, const Matrix& g_out,
                std::vector<double>& grad, Matrix* grad_input = nullptr) const;

  /// d(outputs)/d(input) . direction at a single input.
  std::vector<double> input_jacobian(const std::vector<double>& params,
                                     const std::vector<double>& input,
                                     const std::vector<double>& direction) const;

 private:
  MlpSpec spec_;
  std::vector<DenseLayer> layers_;
  std::size_t out_w_offset_ = 0;
  std::size_t out_b_offset_ = 0;
  std::size_t n_params_ = 0;
};

}  // namespace psm::nn
