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

#include <atomic>
#include <cstdlib>
#include <string>

#include "cfsnn/kernels/kernels.hpp"

namespace cfsnn::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(CFSNN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* initial_table() {
  if (const char* env = std::getenv("CFSNN_ISA"); env && *env) {
    const Isa isa = parse_isa(env);
    return &table(isa);
  }
  return &table(detect());
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> t{initial_table()};
  return t;
}

}  // namespace

bool available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
      return cpu_has_avx2();
  }
  return false;
}

const Table& table(Isa isa) {
  if (!available(isa))
    throw Error("kernel variant '" + std::string(isa_name(isa)) +
                "' is not available on this build or CPU");
#if defined(CFSNN_HAVE_AVX2)
  if (isa == Isa::kAvx2) return avx2_table();
#endif
  return scalar_table();
}

Isa detect() { return cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar; }

const Table& active() { return *current().load(std::memory_order_relaxed); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_relaxed); }

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  throw Error("unknown kernel variant '" + std::string(name) +
              "' (expected scalar or avx2)");
}

std::string_view isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

}  // namespace cfsnn::kernels
