// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.
#include <immintrin.h>

#include "psm/simd/kernels.hpp"

namespace psm::simd::avx2 {

namespace {

// 4 x 8 register block: rows i..i+3 of C, columns j..j+7. Element (r, p) of the
// left operand sits at a[r * ars + p * acs], which covers both A and A^T.
inline void block4x8(std::size_t k, const double* a, std::size_t ars, std::size_t acs,
                     const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  __m256d c00 = _mm256_loadu_pd(c), c01 = _mm256_loadu_pd(c + 4);
  __m256d c10 = _mm256_loadu_pd(c + ldc), c11 = _mm256_loadu_pd(c + ldc + 4);
  __m256d c20 = _mm256_loadu_pd(c + 2 * ldc), c21 = _mm256_loadu_pd(c + 2 * ldc + 4);
  __m256d c30 = _mm256_loadu_pd(c + 3 * ldc), c31 = _mm256_loadu_pd(c + 3 * ldc + 4);
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * ldb);
    const __m256d b1 = _mm256_loadu_pd(b + p * ldb + 4);
    const double* ap = a + p * acs;
    __m256d a0 = _mm256_broadcast_sd(ap);
    c00 = _mm256_fmadd_pd(a0, b0, c00);
    c01 = _mm256_fmadd_pd(a0, b1, c01);
    a0 = _mm256_broadcast_sd(ap + ars);
    c10 = _mm256_fmadd_pd(a0, b0, c10);
    c11 = _mm256_fmadd_pd(a0, b1, c11);
    a0 = _mm256_broadcast_sd(ap + 2 * ars);
    c20 = _mm256_fmadd_pd(a0, b0, c20);
    c21 = _mm256_fmadd_pd(a0, b1, c21);
    a0 = _mm256_broadcast_sd(ap + 3 * ars);
    c30 = _mm256_fmadd_pd(a0, b0, c30);
    c31 = _mm256_fmadd_pd(a0, b1, c31);
  }
  _mm256_storeu_pd(c, c00);
  _mm256_storeu_pd(c + 4, c01);
  _mm256_storeu_pd(c + ldc, c10);
  _mm256_storeu_pd(c + ldc + 4, c11);
  _mm256_storeu_pd(c + 2 * ldc, c20);
  _mm256_storeu_pd(c + 2 * ldc + 4, c21);
  _mm256_storeu_pd(c + 3 * ldc, c30);
  _mm256_storeu_pd(c + 3 * ldc + 4, c31);
}

// One row of C, columns j..j+n. Vector body plus scalar tail.
inline void row_strip(std::size_t n, std::size_t k, const double* a, std::size_t acs,
                      const double* b, std::size_t ldb, double* c) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_loadu_pd(c + j);
    for (std::size_t p = 0; p < k; ++p) {
      acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a + p * acs), _mm256_loadu_pd(b + p * ldb + j),
                            acc);
    }
    _mm256_storeu_pd(c + j, acc);
  }
  for (; j < n; ++j) {
    double acc = c[j];
    for (std::size_t p = 0; p < k; ++p) acc += a[p * acs] * b[p * ldb + j];
    c[j] = acc;
  }
}

void gemm_strided(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t ars,
                  std::size_t acs, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  const std::size_t n8 = n - n % 8;
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    for (std::size_t j = 0; j < n8; j += 8) {
      block4x8(k, a + i * ars, ars, acs, b + j, ldb, c + i * ldc + j, ldc);
    }
    if (n8 < n) {
      for (std::size_t r = 0; r < 4; ++r) {
        row_strip(n - n8, k, a + (i + r) * ars, acs, b + n8, ldb, c + (i + r) * ldc + n8);
      }
    }
  }
  for (; i < m; ++i) row_strip(n, k, a + i * ars, acs, b, ldb, c + i * ldc);
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] = 0.0;
    }
  }
  gemm_strided(m, n, k, a, lda, 1, b, ldb, c, ldc);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  gemm_strided(m, n, k, a, 1, lda, b, ldb, c, ldc);
}

void mul_dtanh(std::size_t n, const double* s, const double* x, double* y) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d sv = _mm256_loadu_pd(s + i);
    const __m256d d = _mm256_fnmadd_pd(sv, sv, one);
    _mm256_storeu_pd(y + i, _mm256_mul_pd(d, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = (1.0 - s[i] * s[i]) * x[i];
}

void accum_d2tanh(std::size_t n, const double* s, const double* gds, const double* da,
                  double* ga) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d m2 = _mm256_set1_pd(-2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d sv = _mm256_loadu_pd(s + i);
    const __m256d d = _mm256_fnmadd_pd(sv, sv, one);
    const __m256d w = _mm256_mul_pd(_mm256_mul_pd(m2, sv), d);
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(gds + i), _mm256_loadu_pd(da + i));
    _mm256_storeu_pd(ga + i, _mm256_fmadd_pd(w, prod, _mm256_loadu_pd(ga + i)));
  }
  for (; i < n; ++i) ga[i] += -2.0 * s[i] * (1.0 - s[i] * s[i]) * gds[i] * da[i];
}

void add_row_bias(std::size_t rows, std::size_t cols, const double* bias, double* c,
                  std::size_t ldc) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* cr = c + r * ldc;
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      _mm256_storeu_pd(cr + j, _mm256_add_pd(_mm256_loadu_pd(cr + j), _mm256_loadu_pd(bias + j)));
    }
    for (; j < cols; ++j) cr[j] += bias[j];
  }
}

void col_sum_accum(std::size_t rows, std::size_t cols, const double* a, std::size_t lda,
                   double* out) {
  std::size_t j = 0;
  for (; j + 4 <= cols; j += 4) {
    __m256d acc = _mm256_loadu_pd(out + j);
    for (std::size_t r = 0; r < rows; ++r) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + r * lda + j));
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < cols; ++j) {
    double acc = out[j];
    for (std::size_t r = 0; r < rows; ++r) acc += a[r * lda + j];
    out[j] = acc;
  }
}

void adam_update(std::size_t n, double* p, const double* g, double* m, double* v, double lr,
                 double b1, double b2, double eps, double bc1, double bc2) {
  const __m256d vb1 = _mm256_set1_pd(b1), vb1c = _mm256_set1_pd(1.0 - b1);
  const __m256d vb2 = _mm256_set1_pd(b2), vb2c = _mm256_set1_pd(1.0 - b2);
  const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
  const __m256d vbc1 = _mm256_set1_pd(bc1), vbc2 = _mm256_set1_pd(bc2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    const __m256d mv = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                                     _mm256_mul_pd(vb1c, gv));
    const __m256d vv = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(vb2c, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(_mm256_div_pd(vv, vbc2)), veps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, _mm256_div_pd(mv, vbc1)), den);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  scalar_kernels().adam_update(n - i, p + i, g + i, m + i, v + i, lr, b1, b2, eps, bc1, bc2);
}

double dot(std::size_t n, const double* a, const double* b) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{"avx2",       gemm_nn,      gemm_tn,       mul_dtanh,
                             accum_d2tanh, add_row_bias, col_sum_accum, adam_update,
                             dot};
  return t;
}

}  // namespace psm::simd::avx2
