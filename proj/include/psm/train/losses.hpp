#pragma once

#include "psm/core/matrix.hpp"

namespace psm::train {

/// log(cosh(x)) without overflow.
double logcosh(double x);

/// Mean log-cosh of (pred - target) over all entries. When `grad` is given it
/// receives dLoss/dpred with the same shape.
double measurement_loss(const Matrix& pred, const Matrix& target, Matrix* grad = nullptr);

}  // namespace psm::train
