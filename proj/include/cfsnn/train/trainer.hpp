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

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "cfsnn/data/dataset.hpp"
#include "cfsnn/loss/loss.hpp"
#include "cfsnn/train/network.hpp"

namespace cfsnn::train {

// eta0 * (1 + cos(pi * epoch / total)) / 2
real cosine_lr(std::size_t epoch, std::size_t total_epochs, real eta0);

// Heavy-ball SGD: m = momentum * m + (g + wd * w); w -= lr * m.
// Surrogate steepness parameters skip weight decay and may use their own
// step size.
class Sgd {
 public:
  explicit Sgd(const TrainConfig& cfg) : cfg_(cfg) {}
  void step(std::span<ad::Parameter* const> params, real lr) const;

 private:
  TrainConfig cfg_;
};

struct LossParts {
  ad::Tensor total;
  ad::Tensor ce;
  ad::Tensor pnb;  // undefined when the balance term is off
  ForwardResult forward;
};

// Forward pass plus loss on the active tape.
LossParts compute_loss(Network& net, const ad::Tensor& x,
                       std::span<const std::size_t> labels,
                       const loss::LossConfig& lc, const ForwardOptions& opts);

struct StepStats {
  real loss = 0;
  real ce = 0;
  real pnb = 0;
};

// Zeroes gradients, runs forward and backward on a fresh tape, and applies
// one optimizer update. A non-finite value aborts the step with a
// NumericError naming where it appeared.
StepStats train_step(Network& net, const ad::Tensor& x,
                     std::span<const std::size_t> labels, const Sgd& opt,
                     real lr, const loss::LossConfig& lc,
                     FireMode mode = FireMode::kSpike);

struct EvalOptions {
  data::EncoderConfig encoder;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;  // rate-encoding draws
  std::size_t threads = 1;
  // Keep pre-reset membrane values, [spiking layer][step] -> flat samples.
  bool capture_membranes = false;
  // Keep per-element spike values of every spiking layer.
  bool capture_spikes = false;
};

struct EvalMetrics {
  double accuracy = 0;
  double mean_loss = 0;  // cross-entropy
  std::size_t samples = 0;
  std::vector<std::size_t> predictions;
  std::vector<real> scores;  // [samples, classes]
  SpikeRecord spikes;
  SpikeRecord synapses;
  std::vector<double> firing_rates;  // per spiking layer, magnitude convention
  std::vector<std::vector<std::vector<real>>> membranes;
  std::vector<std::vector<real>> spike_values;  // [spiking layer] -> values
};

// Eval-mode inference (running statistics, no gradient).
EvalMetrics evaluate(Network& net, const data::Dataset& ds, const EvalOptions& opts);

struct EpochRow {
  std::size_t epoch = 0;
  real lr = 0;
  double train_loss = 0, train_ce = 0, train_pnb = 0;
  double test_acc = 0;
  double mean_firing_rate = 0;
  std::vector<real> alphas;  // [l][t] flattened as l * T + t
};

void write_metrics_header(std::ostream& os, const Network& net);
void write_metrics_row(std::ostream& os, const EpochRow& row);

struct FitOptions {
  TrainConfig train;
  loss::LossConfig loss;
  data::EncoderConfig encoder;
  std::uint64_t seed = 0;
  FireMode mode = FireMode::kSpike;
  bool augment = false;
  std::size_t eval_threads = 1;
  std::ostream* metrics = nullptr;
  // Called after each epoch with the finished row.
  std::function<void(const EpochRow&)> on_epoch;
};

// Runs epochs [first_epoch, train.epochs) and returns one row per epoch.
std::vector<EpochRow> fit(Network& net, const data::Dataset& train_set,
                          const data::Dataset& test_set, const FitOptions& opts,
                          std::size_t first_epoch = 0);

}  // namespace cfsnn::train
