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

#pragma once

// Data-parallel inner loops used by the tensor ops and the neuron dynamics.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2/FMA variant. The variant is chosen once at first use from the CPU's
// capabilities and can be overridden with CFSNN_ISA=scalar|avx2 or select().
// All pointers are to contiguous row-major storage; aliasing of inputs and
// outputs is allowed only where noted.

#include <cstddef>
#include <string_view>

#include "cfsnn/core/types.hpp"

namespace cfsnn::kernels {

enum class Isa { kScalar, kAvx2 };

struct Table {
  Isa isa;
  const char* name;

  // c[m,n] = a[m,k] * b[k,n], or c += a*b when accumulate is set.
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const real* a,
                  const real* b, real* c, bool accumulate);
  // y += alpha * x
  void (*axpy)(std::size_t n, real alpha, const real* x, real* y);
  // y = alpha * x (x may alias y)
  void (*scale)(std::size_t n, real alpha, const real* x, real* y);
  // out = a + b (out may alias a or b)
  void (*add)(std::size_t n, const real* a, const real* b, real* out);
  // out = a * b (out may alias a or b)
  void (*mul)(std::size_t n, const real* a, const real* b, real* out);
  // out += a * b
  void (*mul_acc)(std::size_t n, const real* a, const real* b, real* out);
  real (*dot)(std::size_t n, const real* a, const real* b);
  real (*sum)(std::size_t n, const real* x);
  real (*abs_sum)(std::size_t n, const real* x);
  bool (*all_finite)(std::size_t n, const real* x);
  // u = k_tau * v + i (u may alias v or i)
  void (*leaky_integrate)(std::size_t n, real k_tau, const real* v,
                          const real* i, real* u);
  // s = [u >= theta]
  void (*lif_fire)(std::size_t n, const real* u, real theta, real* s);
  // s = sum_k [u > k*theta_p] - sum_k [u < k*theta_n]  (theta_n < 0)
  void (*cf_fire)(std::size_t n, const real* u, real theta_p, real theta_n,
                  int k_p, int k_n, real* s);
};

const Table& scalar_table();
#if defined(CFSNN_HAVE_AVX2)
const Table& avx2_table();
#endif

// True when the variant was compiled in and the CPU supports it.
bool available(Isa isa);
const Table& table(Isa isa);

// The table every op dispatches through.
const Table& active();
// Process-wide override; throws if the variant is unavailable.
void select(Isa isa);
Isa detect();

Isa parse_isa(std::string_view name);
std::string_view isa_name(Isa isa);

}  // namespace cfsnn::kernels
