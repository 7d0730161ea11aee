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

#include <cmath>
#include <cstring>

#include "cfsnn/kernels/kernels.hpp"

namespace cfsnn::kernels {
namespace {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const real* a,
             const real* b, real* c, bool accumulate) {
  if (!accumulate) std::memset(c, 0, m * n * sizeof(real));
  for (std::size_t i = 0; i < m; ++i) {
    real* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const real av = a[i * k + p];
      if (av == real(0)) continue;
      const real* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void axpy(std::size_t n, real alpha, const real* x, real* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(std::size_t n, real alpha, const real* x, real* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

void add(std::size_t n, const real* a, const real* b, real* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(std::size_t n, const real* a, const real* b, real* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc(std::size_t n, const real* a, const real* b, real* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

real dot(std::size_t n, const real* a, const real* b) {
  real s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

real sum(std::size_t n, const real* x) {
  real s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

real abs_sum(std::size_t n, const real* x) {
  real s = 0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i]);
  return s;
}

bool all_finite(std::size_t n, const real* x) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

void leaky_integrate(std::size_t n, real k_tau, const real* v, const real* in,
                     real* u) {
  for (std::size_t i = 0; i < n; ++i) u[i] = k_tau * v[i] + in[i];
}

void lif_fire(std::size_t n, const real* u, real theta, real* s) {
  for (std::size_t i = 0; i < n; ++i) s[i] = u[i] >= theta ? real(1) : real(0);
}

void cf_fire(std::size_t n, const real* u, real theta_p, real theta_n, int k_p,
             int k_n, real* s) {
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (int k = 1; k <= k_p; ++k)
      if (u[i] > k * theta_p) ++count;
    for (int k = 1; k <= k_n; ++k)
      if (u[i] < k * theta_n) --count;
    s[i] = static_cast<real>(count);
  }
}

}  // namespace

const Table& scalar_table() {
  static const Table t{Isa::kScalar, "scalar", gemm_nn,     axpy,
                       scale,        add,      mul,         mul_acc,
                       dot,          sum,      abs_sum,     all_finite,
                       leaky_integrate,        lif_fire,    cf_fire};
  return t;
}

}  // namespace cfsnn::kernels
