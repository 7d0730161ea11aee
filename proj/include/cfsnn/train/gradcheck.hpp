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

// Central finite-difference checks of the backward rules.
//
// Each check evaluates a scalar function of some leaf tensors, runs backward
// once, then perturbs every leaf element by +-h and compares. The error of an
// element is |analytic - numeric| / max(|analytic|, |numeric|, floor).

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cfsnn/autodiff/tensor.hpp"
#include "cfsnn/loss/loss.hpp"
#include "cfsnn/train/network.hpp"

namespace cfsnn::train {

struct GradcheckOptions {
  double h = 1e-5;
  double floor = 1e-3;
  double ops_tol = 1e-5;
  double loss_tol = 1e-5;
  double e2e_tol = 1e-4;
  std::uint64_t seed = 0;
};

struct Probe {
  std::string name;
  ad::Tensor tensor;  // leaf; requires_grad is set by the check
};

struct CategoryResult {
  std::string name;
  double tolerance = 0;
  bool skipped = false;
  std::string skip_reason;
  double max_error = 0;
  std::string worst;  // "<check>/<probe>[index]"
  std::size_t elements = 0;

  bool passed() const { return skipped || max_error < tolerance; }
};

double relative_error(double analytic, double numeric, double floor);

// Compares analytic and numeric gradients of `f` with respect to `probes`
// and folds the outcome into `into` under the label `check`.
void check_function(const std::string& check, const std::function<ad::Tensor()>& f,
                    std::vector<Probe> probes, const GradcheckOptions& opts,
                    CategoryResult& into);

// Every differentiable tensor op on small random operands.
CategoryResult check_ops(const GradcheckOptions& opts);

CategoryResult check_losses(const GradcheckOptions& opts);

// Balance term with potentials held inside their regions. Skipped when
// lambda is zero.
CategoryResult check_pnb(const NeuronConfig& cfg, const loss::LossConfig& lc,
                         const GradcheckOptions& opts);

// Whole network in smoothed mode, cross-entropy loss, every parameter
// including the surrogate steepness grid.
CategoryResult check_end_to_end(Network& net, const ad::Tensor& x,
                                std::span<const std::size_t> labels,
                                const GradcheckOptions& opts);

}  // namespace cfsnn::train
