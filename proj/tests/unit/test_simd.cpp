#include <doctest.h>

#include <cmath>
#include <vector>

#include "psm/core/random.hpp"
#include "psm/simd/kernels.hpp"

using namespace psm;

namespace {

std::vector<double> rand_vec(Rng& r, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = r.uniform(-1.0, 1.0);
  return v;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  }
  return worst;
}

}  // namespace

TEST_CASE("active table is named") {
  const auto name = simd::active_name();
  CHECK((name == "scalar" || name == "avx2"));
}

TEST_CASE("scalar gemm against a naive product") {
  const auto& k = simd::scalar_kernels();
  Rng r(3);
  const std::size_t m = 7, n = 5, kk = 9;
  const auto a = rand_vec(r, m * kk), b = rand_vec(r, kk * n);
  std::vector<double> c(m * n, 0.0);
  k.gemm_nn(m, n, kk, a.data(), kk, b.data(), n, c.data(), n, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < kk; ++l) s += a[i * kk + l] * b[l * n + j];
      CHECK(c[i * n + j] == doctest::Approx(s).epsilon(1e-14));
    }
  }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const auto* v = simd::avx2_kernels();
  if (v == nullptr) {
    MESSAGE("AVX2 kernels unavailable on this machine");
    return;
  }
  const auto& s = simd::scalar_kernels();
  Rng r(17);
  for (std::size_t m : {1u, 3u, 8u, 13u}) {
    for (std::size_t n : {1u, 4u, 7u, 33u}) {
      const std::size_t kk = 11;
      const auto a = rand_vec(r, m * kk), b = rand_vec(r, kk * n);
      auto c1 = rand_vec(r, m * n), c2 = c1;
      s.gemm_nn(m, n, kk, a.data(), kk, b.data(), n, c1.data(), n, true);
      v->gemm_nn(m, n, kk, a.data(), kk, b.data(), n, c2.data(), n, true);
      CHECK(max_rel(c1, c2) < 1e-12);

      const auto at = rand_vec(r, kk * m);
      auto d1 = rand_vec(r, m * n), d2 = d1;
      s.gemm_tn(m, n, kk, at.data(), m, b.data(), n, d1.data(), n);
      v->gemm_tn(m, n, kk, at.data(), m, b.data(), n, d2.data(), n);
      CHECK(max_rel(d1, d2) < 1e-12);

      const auto bias = rand_vec(r, n);
      auto e1 = rand_vec(r, m * n), e2 = e1;
      s.add_row_bias(m, n, bias.data(), e1.data(), n);
      v->add_row_bias(m, n, bias.data(), e2.data(), n);
      CHECK(max_rel(e1, e2) == 0.0);

      std::vector<double> o1(n, 0.0), o2(n, 0.0);
      s.col_sum_accum(m, n, c1.data(), n, o1.data());
      v->col_sum_accum(m, n, c1.data(), n, o2.data());
      CHECK(max_rel(o1, o2) < 1e-13);
    }
  }
  for (std::size_t n : {1u, 5u, 64u, 67u}) {
    const auto sv = rand_vec(r, n), x = rand_vec(r, n), gds = rand_vec(r, n), da = rand_vec(r, n);
    std::vector<double> y1(n), y2(n);
    s.mul_dtanh(n, sv.data(), x.data(), y1.data());
    v->mul_dtanh(n, sv.data(), x.data(), y2.data());
    CHECK(max_rel(y1, y2) < 1e-14);
    auto g1 = rand_vec(r, n), g2 = g1;
    s.accum_d2tanh(n, sv.data(), gds.data(), da.data(), g1.data());
    v->accum_d2tanh(n, sv.data(), gds.data(), da.data(), g2.data());
    CHECK(max_rel(g1, g2) < 1e-14);
    CHECK(s.dot(n, x.data(), da.data()) == doctest::Approx(v->dot(n, x.data(), da.data())).epsilon(1e-13));
    auto p1 = rand_vec(r, n), p2 = p1, m1 = rand_vec(r, n), m2 = m1;
    std::vector<double> v1(n, 0.1), v2(n, 0.1);
    s.adam_update(n, p1.data(), gds.data(), m1.data(), v1.data(), 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001);
    v->adam_update(n, p2.data(), gds.data(), m2.data(), v2.data(), 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001);
    CHECK(max_rel(p1, p2) < 1e-14);
    CHECK(max_rel(v1, v2) < 1e-14);
  }
}
