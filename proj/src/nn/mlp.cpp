#include "psm/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "psm/core/digest.hpp"
#include "psm/core/errors.hpp"
#include "psm/core/random.hpp"
#include "psm/simd/kernels.hpp"

namespace psm::nn {

void MlpSpec::validate() const {
  if (input_dim == 0 || head_width == 0 || head_depth == 0 || inter_width == 0 || tail_width == 0) {
    throw ConfigError("mlp: all dimensions must be positive");
  }
}

std::uint64_t MlpSpec::fingerprint() const {
  const std::string key = "mlp/in=" + std::to_string(input_dim) + "/h=" + std::to_string(head_width) +
                          "x" + std::to_string(head_depth) + "/i=" + std::to_string(inter_width) +
                          "/t=3x" + std::to_string(tail_width) +
                          (activation == Activation::tanh ? "/tanh" : "/identity");
  return fnv1a64(key);
}

Mlp::Mlp(MlpSpec spec) : spec_(spec) {
  spec_.validate();
  std::size_t offset = 0;
  auto add = [&](std::size_t n_in, std::size_t n_out) {
    DenseLayer l;
    l.n_in = n_in;
    l.n_out = n_out;
    l.w_offset = offset;
    offset += n_in * n_out;
    l.b_offset = offset;
    offset += n_out;
    layers_.push_back(l);
  };
  add(spec_.input_dim, spec_.head_width);
  for (std::size_t i = 1; i < spec_.head_depth; ++i) add(spec_.head_width, spec_.head_width);
  add(spec_.head_width, spec_.inter_width);
  // The three tail hidden layers read the same input, so they are stored as one
  // dense block of width 3 * tail_width.
  add(spec_.inter_width, 3 * spec_.tail_width);
  out_w_offset_ = offset;
  offset += 3 * spec_.tail_width;
  out_b_offset_ = offset;
  offset += 3;
  n_params_ = offset;
}

std::vector<double> Mlp::init_params(std::uint64_t seed) const {
  std::vector<double> p(n_params_, 0.0);
  Rng rng(seed);
  for (const auto& l : layers_) {
    const double bound = std::sqrt(3.0 / static_cast<double>(l.n_in));
    for (std::size_t i = 0; i < l.n_in * l.n_out; ++i) p[l.w_offset + i] = rng.uniform(-bound, bound);
  }
  const double bound = std::sqrt(3.0 / static_cast<double>(spec_.tail_width));
  for (std::size_t i = 0; i < 3 * spec_.tail_width; ++i) p[out_w_offset_ + i] = rng.uniform(-bound, bound);
  return p;
}

Matrix Mlp::forward(const std::vector<double>& params, const Matrix& x) const {
  EvalTrace trace;
  forward(params, x, 0, trace);
  return trace.output;
}

void Mlp::forward(const std::vector<double>& params, const Matrix& x_aug, std::size_t k,
                  EvalTrace& tr) const {
  if (params.size() != n_params_) throw std::invalid_argument("mlp: parameter vector size mismatch");
  if (x_aug.cols != spec_.input_dim) throw std::invalid_argument("mlp: input dimension mismatch");
  if (x_aug.rows % (k + 1) != 0) throw std::invalid_argument("mlp: rows not a multiple of 1 + K");
  const auto& kern = simd::active();
  const std::size_t rows = x_aug.rows;
  const std::size_t n = rows / (k + 1);
  const bool use_tanh = spec_.activation == Activation::tanh;
  tr.n = n;
  tr.k = k;
  tr.inputs.resize(layers_.size());
  tr.pre.resize(layers_.size());
  tr.activations.resize(layers_.size());
  const Matrix* x = &x_aug;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    tr.inputs[li] = *x;
    Matrix& a = tr.pre[li];
    a.resize(rows, l.n_out);
    kern.gemm_nn(rows, l.n_out, l.n_in, x->ptr(), l.n_in, params.data() + l.w_offset, l.n_out,
                 a.ptr(), l.n_out, false);
    kern.add_row_bias(n, l.n_out, params.data() + l.b_offset, a.ptr(), l.n_out);
    Matrix& s = tr.activations[li];
    if (use_tanh) {
      s.resize(rows, l.n_out);
      for (std::size_t i = 0; i < n * l.n_out; ++i) s.data[i] = std::tanh(a.data[i]);
      for (std::size_t d = 1; d <= k; ++d) {
        kern.mul_dtanh(n * l.n_out, s.ptr(), a.ptr() + d * n * l.n_out, s.ptr() + d * n * l.n_out);
      }
    } else {
      s = a;
    }
    x = &s;
  }
  const Matrix& h = tr.activations.back();
  const std::size_t tw = spec_.tail_width;
  tr.output.resize(rows, 3);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t b = 0; b < 3; ++b) {
      double y = kern.dot(tw, h.ptr() + r * 3 * tw + b * tw, params.data() + out_w_offset_ + b * tw);
      if (r < n) y += params[out_b_offset_ + b];
      tr.output(r, b) = y;
    }
  }
}

void Mlp::backward(const std::vector<double>& params, const EvalTrace& tr, const Matrix& g_out,
                   std::vector<double>& grad, Matrix* grad_input) const {
  const std::size_t n = tr.n;
  const std::size_t k = tr.k;
  const std::size_t rows = n * (k + 1);
  if (g_out.rows != rows || g_out.cols != 3) {
    throw std::invalid_argument("mlp: output seed shape does not match the trace");
  }
  if (grad.size() != n_params_) throw std::invalid_argument("mlp: gradient vector size mismatch");
  const auto& kern = simd::active();
  const bool use_tanh = spec_.activation == Activation::tanh;
  const std::size_t tw = spec_.tail_width;

  // Output layer.
  const Matrix& h = tr.activations.back();
  Matrix g_s(rows, 3 * tw);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t b = 0; b < 3; ++b) {
      const double g = g_out(r, b);
      if (g == 0.0) continue;
      const double* hr = h.ptr() + r * 3 * tw + b * tw;
      double* gw = grad.data() + out_w_offset_ + b * tw;
      const double* w = params.data() + out_w_offset_ + b * tw;
      double* gs = g_s.ptr() + r * 3 * tw + b * tw;
      for (std::size_t j = 0; j < tw; ++j) {
        gw[j] += g * hr[j];
        gs[j] = g * w[j];
      }
      if (r < n) grad[out_b_offset_ + b] += g;
    }
  }

  Matrix g_a, g_x, wt_t;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& l = layers_[li];
    const std::size_t block = n * l.n_out;
    if (use_tanh) {
      const Matrix& s = tr.activations[li];
      const Matrix& a = tr.pre[li];
      g_a.resize(rows, l.n_out);
      kern.mul_dtanh(block, s.ptr(), g_s.ptr(), g_a.ptr());
      for (std::size_t d = 1; d <= k; ++d) {
        kern.accum_d2tanh(block, s.ptr(), g_s.ptr() + d * block, a.ptr() + d * block, g_a.ptr());
        kern.mul_dtanh(block, s.ptr(), g_s.ptr() + d * block, g_a.ptr() + d * block);
      }
    } else {
      g_a = g_s;
    }
    const Matrix& x = tr.inputs[li];
    kern.gemm_tn(l.n_in, l.n_out, rows, x.ptr(), l.n_in, g_a.ptr(), l.n_out,
                 grad.data() + l.w_offset, l.n_out);
    kern.col_sum_accum(n, l.n_out, g_a.ptr(), l.n_out, grad.data() + l.b_offset);
    if (li == 0 && grad_input == nullptr) break;
    wt_t.resize(l.n_out, l.n_in);
    const double* wt = params.data() + l.w_offset;
    for (std::size_t i = 0; i < l.n_in; ++i) {
      for (std::size_t j = 0; j < l.n_out; ++j) wt_t(j, i) = wt[i * l.n_out + j];
    }
    g_x.resize(rows, l.n_in);
    kern.gemm_nn(rows, l.n_in, l.n_out, g_a.ptr(), l.n_out, wt_t.ptr(), l.n_in, g_x.ptr(), l.n_in,
                 false);
    if (li == 0) {
      *grad_input = std::move(g_x);
      break;
    }
    std::swap(g_s, g_x);
  }
}

std::vector<double> Mlp::input_jacobian(const std::vector<double>& params,
                                        const std::vector<double>& input,
                                        const std::vector<double>& direction) const {
  if (input.size() != spec_.input_dim || direction.size() != spec_.input_dim) {
    throw std::invalid_argument("mlp: input/direction dimension mismatch");
  }
  Matrix x(2, spec_.input_dim);
  for (std::size_t j = 0; j < spec_.input_dim; ++j) {
    x(0, j) = input[j];
    x(1, j) = direction[j];
  }
  EvalTrace tr;
  forward(params, x, 1, tr);
  return {tr.output(1, 0), tr.output(1, 1), tr.output(1, 2)};
}

}  // namespace psm::nn
