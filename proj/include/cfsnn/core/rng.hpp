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

#include <array>
#include <cstdint>
#include <span>

namespace cfsnn {

// xoshiro256** (Blackman & Vigna) seeded through SplitMix64.
//
// This generator is part of the file-level contract: synthetic datasets,
// rate encodings, noise draws, and weight initialization are all derived from
// it, so the same (seed, stream) pair yields the same bytes on every
// platform. Derived distributions are implemented here rather than through
// <random> because the standard distributions are implementation-defined.
//
//   uniform01()  : (next() >> 11) * 2^-53, in [0, 1)
//   normal()     : Box-Muller on two uniform01 draws, cosine branch only
//   below(n)     : rejection sampling on the top bits, unbiased
class Rng {
 public:
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed = 0);

  static Rng from_state(const State& s);
  const State& state() const { return s_; }

  std::uint64_t next();

  // Independent child generator. Children with distinct stream ids are
  // decorrelated; the parent state is not advanced.
  Rng split(std::uint64_t stream) const;

  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();
  bool bernoulli(double p) { return uniform01() < p; }
  std::uint64_t below(std::uint64_t n);

  template <class T>
  void shuffle(std::span<T> v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  State s_{};
};

std::uint64_t splitmix64(std::uint64_t& x);

}  // namespace cfsnn
