#include <cmath>

#include "psm/simd/kernels.hpp"

namespace psm::simd {

namespace {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * ldc;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * lda + p];
      const double* bp = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a + p * lda;
    const double* bp = b + p * ldb;
    for (std::size_t i = 0; i < m; ++i) {
      const double api = ap[i];
      double* ci = c + i * ldc;
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

void mul_dtanh(std::size_t n, const double* s, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = (1.0 - s[i] * s[i]) * x[i];
}

void accum_d2tanh(std::size_t n, const double* s, const double* gds, const double* da,
                  double* ga) {
  for (std::size_t i = 0; i < n; ++i) {
    ga[i] += -2.0 * s[i] * (1.0 - s[i] * s[i]) * gds[i] * da[i];
  }
}

void add_row_bias(std::size_t rows, std::size_t cols, const double* bias, double* c,
                  std::size_t ldc) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* cr = c + r * ldc;
    for (std::size_t j = 0; j < cols; ++j) cr[j] += bias[j];
  }
}

void col_sum_accum(std::size_t rows, std::size_t cols, const double* a, std::size_t lda,
                   double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* ar = a + r * lda;
    for (std::size_t j = 0; j < cols; ++j) out[j] += ar[j];
  }
}

void adam_update(std::size_t n, double* p, const double* g, double* m, double* v, double lr,
                 double b1, double b2, double eps, double bc1, double bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

double dot(std::size_t n, const double* a, const double* b) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",     gemm_nn,       gemm_tn,     mul_dtanh,
                                 accum_d2tanh, add_row_bias,  col_sum_accum, adam_update,
                                 dot};
  return table;
}

}  // namespace psm::simd
