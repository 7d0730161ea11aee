// Copyright 2026 The cfsnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "cfsnn/kernels/kernels.hpp"

namespace cfsnn::kernels {
namespace {

template <class T>
struct Vec;

template <>
struct Vec<double> {
  using reg = __m256d;
  static constexpr std::size_t kWidth = 4;
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg set1(double x) { return _mm256_set1_pd(x); }
  static reg zero() { return _mm256_setzero_pd(); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static reg sub(reg a, reg b) { return _mm256_sub_pd(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_pd(a, b); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static reg abs(reg a) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), a); }
  static reg gt(reg a, reg b) { return _mm256_cmp_pd(a, b, _CMP_GT_OQ); }
  static reg ge(reg a, reg b) { return _mm256_cmp_pd(a, b, _CMP_GE_OQ); }
  static reg lt(reg a, reg b) { return _mm256_cmp_pd(a, b, _CMP_LT_OQ); }
  static reg band(reg a, reg b) { return _mm256_and_pd(a, b); }
  // Lanes equal to +-inf or nan have all exponent bits set.
  static bool finite(reg a) {
    const __m256i bits = _mm256_castpd_si256(a);
    const __m256i expo = _mm256_set1_epi64x(0x7ff0000000000000LL);
    const __m256i m = _mm256_cmpeq_epi64(_mm256_and_si256(bits, expo), expo);
    return _mm256_testz_si256(m, m);
  }
  static double hsum(reg v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d s = _mm_add_pd(lo, hi);
    s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
    return _mm_cvtsd_f64(s);
  }
};

template <>
struct Vec<float> {
  using reg = __m256;
  static constexpr std::size_t kWidth = 8;
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg v) { _mm256_storeu_ps(p, v); }
  static reg set1(float x) { return _mm256_set1_ps(x); }
  static reg zero() { return _mm256_setzero_ps(); }
  static reg add(reg a, reg b) { return _mm256_add_ps(a, b); }
  static reg sub(reg a, reg b) { return _mm256_sub_ps(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_ps(a, b); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_ps(a, b, c); }
  static reg abs(reg a) { return _mm256_andnot_ps(_mm256_set1_ps(-0.0f), a); }
  static reg gt(reg a, reg b) { return _mm256_cmp_ps(a, b, _CMP_GT_OQ); }
  static reg ge(reg a, reg b) { return _mm256_cmp_ps(a, b, _CMP_GE_OQ); }
  static reg lt(reg a, reg b) { return _mm256_cmp_ps(a, b, _CMP_LT_OQ); }
  static reg band(reg a, reg b) { return _mm256_and_ps(a, b); }
  static bool finite(reg a) {
    const __m256i bits = _mm256_castps_si256(a);
    const __m256i expo = _mm256_set1_epi32(0x7f800000);
    const __m256i m = _mm256_cmpeq_epi32(_mm256_and_si256(bits, expo), expo);
    return _mm256_testz_si256(m, m);
  }
  static float hsum(reg v) {
    __m128 s = _mm_add_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps(v, 1));
    s = _mm_add_ps(s, _mm_movehl_ps(s, s));
    s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
    return _mm_cvtss_f32(s);
  }
};

using V = Vec<real>;
constexpr std::size_t W = V::kWidth;

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const real* a,
             const real* b, real* c, bool accumulate) {
  if (!accumulate) std::memset(c, 0, m * n * sizeof(real));
  // Column blocks keep a slice of the output row resident while the
  // inner dimension streams through it.
  constexpr std::size_t kBlock = 512;
  for (std::size_t j0 = 0; j0 < n; j0 += kBlock) {
    const std::size_t j1 = std::min(n, j0 + kBlock);
    for (std::size_t i = 0; i < m; ++i) {
      real* crow = c + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const real av = a[i * k + p];
        if (av == real(0)) continue;
        const real* brow = b + p * n;
        const typename V::reg va = V::set1(av);
        std::size_t j = j0;
        for (; j + W <= j1; j += W)
          V::store(crow + j, V::fmadd(va, V::load(brow + j), V::load(crow + j)));
        for (; j < j1; ++j) crow[j] = std::fma(av, brow[j], crow[j]);
      }
    }
  }
}

void axpy(std::size_t n, real alpha, const real* x, real* y) {
  const auto va = V::set1(alpha);
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    V::store(y + i, V::fmadd(va, V::load(x + i), V::load(y + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale(std::size_t n, real alpha, const real* x, real* y) {
  const auto va = V::set1(alpha);
  std::size_t i = 0;
  for (; i + W <= n; i += W) V::store(y + i, V::mul(va, V::load(x + i)));
  for (; i < n; ++i) y[i] = alpha * x[i];
}

void add(std::size_t n, const real* a, const real* b, real* out) {
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    V::store(out + i, V::add(V::load(a + i), V::load(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(std::size_t n, const real* a, const real* b, real* out) {
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    V::store(out + i, V::mul(V::load(a + i), V::load(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc(std::size_t n, const real* a, const real* b, real* out) {
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    V::store(out + i, V::fmadd(V::load(a + i), V::load(b + i), V::load(out + i)));
  for (; i < n; ++i) out[i] = std::fma(a[i], b[i], out[i]);
}

real dot(std::size_t n, const real* a, const real* b) {
  auto acc0 = V::zero(), acc1 = V::zero();
  std::size_t i = 0;
  for (; i + 2 * W <= n; i += 2 * W) {
    acc0 = V::fmadd(V::load(a + i), V::load(b + i), acc0);
    acc1 = V::fmadd(V::load(a + i + W), V::load(b + i + W), acc1);
  }
  for (; i + W <= n; i += W) acc0 = V::fmadd(V::load(a + i), V::load(b + i), acc0);
  real s = V::hsum(V::add(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

real sum(std::size_t n, const real* x) {
  auto acc = V::zero();
  std::size_t i = 0;
  for (; i + W <= n; i += W) acc = V::add(acc, V::load(x + i));
  real s = V::hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

real abs_sum(std::size_t n, const real* x) {
  auto acc = V::zero();
  std::size_t i = 0;
  for (; i + W <= n; i += W) acc = V::add(acc, V::abs(V::load(x + i)));
  real s = V::hsum(acc);
  for (; i < n; ++i) s += std::abs(x[i]);
  return s;
}

bool all_finite(std::size_t n, const real* x) {
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    if (!V::finite(V::load(x + i))) return false;
  for (; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

void leaky_integrate(std::size_t n, real k_tau, const real* v, const real* in,
                     real* u) {
  const auto vk = V::set1(k_tau);
  std::size_t i = 0;
  // mul + add rather than fmadd so results match the scalar reference bitwise.
  for (; i + W <= n; i += W)
    V::store(u + i, V::add(V::mul(vk, V::load(v + i)), V::load(in + i)));
  for (; i < n; ++i) u[i] = k_tau * v[i] + in[i];
}

void lif_fire(std::size_t n, const real* u, real theta, real* s) {
  const auto vt = V::set1(theta);
  const auto one = V::set1(real(1));
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    V::store(s + i, V::band(V::ge(V::load(u + i), vt), one));
  for (; i < n; ++i) s[i] = u[i] >= theta ? real(1) : real(0);
}

void cf_fire(std::size_t n, const real* u, real theta_p, real theta_n, int k_p,
             int k_n, real* s) {
  const auto one = V::set1(real(1));
  std::size_t i = 0;
  for (; i + W <= n; i += W) {
    const auto vu = V::load(u + i);
    auto count = V::zero();
    for (int k = 1; k <= k_p; ++k)
      count = V::add(count, V::band(V::gt(vu, V::set1(k * theta_p)), one));
    for (int k = 1; k <= k_n; ++k)
      count = V::sub(count, V::band(V::lt(vu, V::set1(k * theta_n)), one));
    V::store(s + i, count);
  }
  for (; i < n; ++i) {
    int count = 0;
    for (int k = 1; k <= k_p; ++k)
      if (u[i] > k * theta_p) ++count;
    for (int k = 1; k <= k_n; ++k)
      if (u[i] < k * theta_n) --count;
    s[i] = static_cast<real>(count);
  }
}

}  // namespace

const Table& avx2_table() {
  static const Table t{Isa::kAvx2, "avx2", gemm_nn,     axpy,
                       scale,      add,    mul,         mul_acc,
                       dot,        sum,    abs_sum,     all_finite,
                       leaky_integrate,    lif_fire,    cf_fire};
  return t;
}

}  // namespace cfsnn::kernels
