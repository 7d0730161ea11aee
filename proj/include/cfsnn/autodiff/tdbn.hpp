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

#include <vector>

#include "cfsnn/autodiff/tensor.hpp"

namespace cfsnn::ad {

// Running per-channel statistics kept across training batches.
struct BnRunningStats {
  std::vector<real> mean;
  std::vector<real> var;
  real momentum = real(0.1);

  explicit BnRunningStats(std::size_t channels = 0)
      : mean(channels, real(0)), var(channels, real(1)) {}
};

// Threshold-dependent batch normalization.
//
// `x` has time folded into its leading axis ([T*B, C] or [T*B, C, H, W]);
// statistics are taken per channel (axis 1) jointly over every other axis.
//   y = theta * gamma * (x - mean) / sqrt(var + eps) + beta
// with the biased variance. In training mode the batch statistics are used
// and folded into `running` (if given); in eval mode `running` is used.
Tensor tdbn_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                    real theta, real eps, bool training,
                    BnRunningStats* running = nullptr);

}  // namespace cfsnn::ad
