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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cfsnn/autodiff/tensor.hpp"
#include "cfsnn/neuron/config.hpp"
#include "cfsnn/surrogate/surrogate.hpp"

namespace cfsnn {

// Post-reset membrane of one layer, carried between time steps.
struct LayerState {
  std::vector<real> v;
  std::size_t step = 0;

  explicit LayerState(std::size_t neurons = 0) : v(neurons, real(0)) {}
  void reset() {
    std::fill(v.begin(), v.end(), real(0));
    step = 0;
  }
};

struct StepResult {
  std::vector<real> u;       // pre-reset membrane
  std::vector<real> spikes;  // 0/1 for LIF, signed counts for CF
};

// u = k_tau * v + I; s = [u >= theta]; hard: v = u (1 - s) + s u_reset,
// soft: v = u - s theta.
StepResult lif_step(LayerState& state, std::span<const real> input_current,
                    const NeuronConfig& cfg);

// s = sum_{k<=K_P} [u > k theta_p] - sum_{k<=K_N} [u < k theta_n].
std::vector<real> cf_fire(std::span<const real> u, const NeuronConfig& cfg);

// Soft reset: v = u - s theta_p above theta_p, v = u + s theta_n below
// theta_n (s negative there), v = u in between. Throws if a spike count lies
// outside [-K_N, K_P].
std::vector<real> cf_reset(std::span<const real> u, std::span<const real> spikes,
                           const NeuronConfig& cfg);

StepResult cf_step(LayerState& state, std::span<const real> input_current,
                   const NeuronConfig& cfg);

// Dispatches on cfg.kind.
StepResult neuron_step(LayerState& state, std::span<const real> input_current,
                       const NeuronConfig& cfg);

// Spike magnitudes per layer and time step, the input to the energy model.
class SpikeRecord {
 public:
  enum class CountMode { kMagnitude, kNonzero };

  struct Cell {
    double magnitude = 0;  // sum |s|
    double nonzero = 0;    // number of s != 0
    double elements = 0;   // neurons x samples observed
  };

  // Returns the layer's index, registering it on first use.
  std::size_t layer_index(const std::string& name);
  void add(std::size_t layer, std::size_t step, std::span<const real> spikes);
  void merge(const SpikeRecord& other);
  void note_batch() { ++batches_; }

  std::size_t layers() const { return names_.size(); }
  std::size_t steps(std::size_t layer) const { return cells_[layer].size(); }
  const std::string& name(std::size_t layer) const { return names_[layer]; }
  const Cell& cell(std::size_t layer, std::size_t step) const {
    return cells_[layer][step];
  }
  std::size_t batches() const { return batches_; }
  bool empty() const;

  // total spike measure / (elements x steps); elements already include the
  // batch dimension.
  double firing_rate(std::size_t layer, CountMode mode = CountMode::kMagnitude) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<Cell>> cells_;
  std::size_t batches_ = 0;
};

SpikeRecord::CountMode parse_count_mode(const std::string& s);

// --- membrane distribution diagnostics ---

struct BinSpec {
  real lo = real(-3);
  real hi = real(3);
  real width = real(0.25);

  std::size_t bins() const;
};

struct HistogramRow {
  std::size_t layer, step;
  real left, right;
  std::size_t count;
};

struct HistogramSummary {
  std::size_t layer, step;
  std::size_t samples;
  std::size_t outside;  // samples outside [lo, hi]
  double mean, variance;
  double oracle_variance;   // geometric series of the no-reset recurrence
  double literal_variance;  // (1 + (t - 1) k_tau^2) theta^2
};

struct MembraneHistogram {
  std::vector<HistogramRow> rows;
  std::vector<HistogramSummary> summaries;

  // Columns: layer,step,bin_left,bin_right,count,mean,variance,
  // oracle_variance,literal_variance. Summary rows carry "summary" in
  // bin_left and the sample count in count.
  void write_csv(std::ostream& os) const;
};

// Variance of u^t (t = 1, 2, ...) for a no-reset leaky integrator fed
// i.i.d. N(0, theta^2) currents: theta^2 * sum_{i=0}^{t-1} k_tau^{2i}.
double no_reset_variance(std::size_t t, double k_tau, double theta);
double literal_variance(std::size_t t, double k_tau, double theta);

// samples[layer][step] holds membrane values. Bins are [left, right) except
// the last, which is closed.
MembraneHistogram membrane_histogram(
    const std::vector<std::vector<std::vector<real>>>& samples,
    const BinSpec& bins, double k_tau, double theta);

// --- differentiable dynamics for training ---

enum class FireMode {
  kSpike,     // integer spikes forward, surrogate backward
  kSmoothed,  // S(u) forward, so backward is the exact derivative
};

struct SpikingStep {
  ad::Tensor u;  // pre-reset membrane
  ad::Tensor s;  // spikes
  ad::Tensor v;  // post-reset membrane
};

// One time step of a spiking layer on the tape. `v_prev` may be undefined at
// the first step (zero initial membrane). `alpha` is the scalar steepness fed
// to the rule; it receives a gradient when it requires one.
SpikingStep spiking_step(const ad::Tensor& v_prev, const ad::Tensor& current,
                         const NeuronConfig& cfg,
                         const surrogate::SurrogateRule& rule,
                         const ad::Tensor& alpha, FireMode mode);

}  // namespace cfsnn
