#include "psm/train/losses.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace psm::train {

double logcosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double measurement_loss(const Matrix& pred, const Matrix& target, Matrix* grad) {
  if (pred.rows != target.rows || pred.cols != target.cols) {
    throw std::invalid_argument("measurement loss: shape mismatch");
  }
  const std::size_t n = pred.data.size();
  if (grad) grad->resize(pred.rows, pred.cols);
  if (n == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = pred.data[i] - target.data[i];
    sum += logcosh(e);
    if (grad) grad->data[i] = std::tanh(e) * inv;
  }
  return sum * inv;
}

}  // namespace psm::train
