#pragma once

#include <cstddef>
#include <string_view>

namespace psm::simd {

/// Inner-loop kernels of the NN engine. Matrices are row-major with explicit
/// leading dimensions. Every entry has a scalar reference implementation; the
/// AVX2/FMA variant is picked at runtime when the CPU supports it.
struct KernelTable {
  const char* name;

  /// C[m x n] = (accumulate ? C : 0) + A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);
  /// C[m x n] += A^T * B with A stored k x m and B stored k x n.
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc);
  /// y = (1 - s^2) * x
  void (*mul_dtanh)(std::size_t n, const double* s, const double* x, double* y);
  /// ga += -2 s (1 - s^2) * gds * da   (second-order tanh term)
  void (*accum_d2tanh)(std::size_t n, const double* s, const double* gds, const double* da,
                       double* ga);
  /// C[r, :] += bias for every row r
  void (*add_row_bias)(std::size_t rows, std::size_t cols, const double* bias, double* c,
                       std::size_t ldc);
  /// out[j] += sum_r A[r, j]
  void (*col_sum_accum)(std::size_t rows, std::size_t cols, const double* a, std::size_t lda,
                        double* out);
  /// Adam moment update and step: m = b1 m + (1-b1) g; v = b2 v + (1-b2) g^2;
  /// p -= lr * (m / bc1) / (sqrt(v / bc2) + eps)
  void (*adam_update)(std::size_t n, double* p, const double* g, double* m, double* v, double lr,
                      double b1, double b2, double eps, double bc1, double bc2);
  double (*dot)(std::size_t n, const double* a, const double* b);
};

const KernelTable& scalar_kernels();
/// nullptr when the AVX2 variant was not compiled or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// Table used by the engine. Resolved once; PSM_SIMD=scalar forces the reference path.
const KernelTable& active();
std::string_view active_name();

}  // namespace psm::simd
