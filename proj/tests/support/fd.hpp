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

// Central-difference oracle used by the tests, independent of the library's
// own gradient checker.

#include <functional>
#include <vector>

#include "cfsnn/autodiff/tensor.hpp"

namespace cfsnn::testing {

struct GradPair {
  std::vector<double> analytic;
  std::vector<double> numeric;

  double max_rel_err(double floor) const {
    double worst = 0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double den = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / den);
    }
    return worst;
  }
};

// Gradients of the scalar `f()` with respect to every element of `leaves`,
// concatenated in order.
inline GradPair fd_compare(const std::function<ad::Tensor()>& f,
                           std::vector<ad::Tensor> leaves, double h = 1e-5) {
  for (auto& l : leaves) {
    l.set_requires_grad(true);
    l.zero_grad();
  }
  {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    tape.backward(f());
  }
  GradPair out;
  for (auto& l : leaves) {
    const auto g = l.grad();
    auto v = l.mutable_values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.analytic.push_back(g.empty() ? 0.0 : static_cast<double>(g[i]));
      const real orig = v[i];
      double up, down;
      {
        ad::NoGradScope ng;
        v[i] = static_cast<real>(orig + h);
        up = f().item();
        v[i] = static_cast<real>(orig - h);
        down = f().item();
      }
      v[i] = orig;
      out.numeric.push_back((up - down) / (2 * h));
    }
  }
  return out;
}

}  // namespace cfsnn::testing
