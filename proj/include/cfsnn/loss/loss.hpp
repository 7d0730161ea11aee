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

#include <optional>
#include <span>
#include <vector>

#include "cfsnn/autodiff/tensor.hpp"
#include "cfsnn/neuron/config.hpp"

namespace cfsnn::loss {

struct LossConfig {
  real lambda = real(0.25);
  real epsilon = real(1e-6);
  real term_clamp = real(10.0);
  // Indices of spiking layers whose potentials enter the balance term;
  // empty means all of them.
  std::vector<std::size_t> pnb_layers;
  // Potentials beyond K * threshold join the outermost region of their sign.
  bool include_saturated = true;

  void validate() const;
  bool uses_layer(std::size_t spiking_layer) const;
};

// -log softmax(output)[label] for one score vector.
real cross_entropy(std::span<const real> output, std::size_t label);

// Mean cross-entropy over a [batch, classes] score tensor, differentiable in
// the scores (gradient softmax - onehot per row, divided by batch).
ad::Tensor cross_entropy(const ad::Tensor& scores,
                         std::span<const std::size_t> labels);

// Region of a membrane value: +k for U+(k) = ((k-1) theta_p, k theta_p],
// -k for U-(k) = [-k Θ, -(k-1) Θ) with Θ = |theta_n|, and 0 when the value
// belongs to no region (u = 0, or beyond K thresholds without
// include_saturated).
int pnb_region(real u, const NeuronConfig& cfg, int k_levels,
               bool include_saturated);

std::vector<int> pnb_partition(std::span<const real> u, const NeuronConfig& cfg,
                               int k_levels, bool include_saturated = true);

// sum u w / (sum w + eps), w = exp(-|c - u|), c = k theta_p on the positive
// side and -k Θ on the negative side. Empty input gives 0.
real pnb_weighted_mean(std::span<const real> members, int k, bool positive,
                       const NeuronConfig& cfg, real eps);

// Balance term of one potential set:
//   (1/K) sum_k min(|log(|mu+(k)| / (|mu-(k)| + eps) + eps)|, term_clamp)
real pnb_value(std::span<const real> u, const NeuronConfig& cfg,
               const LossConfig& lc);

// Mean balance term over several potential tensors, differentiable in the
// potentials with region membership held fixed. Clamped terms pass no
// gradient.
ad::Tensor pnb_loss(std::span<const ad::Tensor> potentials,
                    const NeuronConfig& cfg, const LossConfig& lc);

// ce + lambda * pnb (pnb may be undefined when lambda is 0).
ad::Tensor total_loss(const ad::Tensor& ce, const ad::Tensor& pnb,
                      const LossConfig& lc);

}  // namespace cfsnn::loss
