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

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cfsnn/autodiff/tensor.hpp"
#include "cfsnn/neuron/neuron.hpp"
#include "cfsnn/surrogate/surrogate.hpp"
#include "cfsnn/train/spec.hpp"

namespace cfsnn::train {

// A layer that performs multiply-accumulates on its input.
struct MacSite {
  std::string name;
  std::uint64_t flops = 0;     // MACs per sample per time step
  bool network_input = false;  // reads the encoded input directly
};

struct ForwardOptions {
  bool training = false;
  FireMode mode = FireMode::kSpike;
};

struct ForwardResult {
  ad::Tensor scores;     // [batch, classes]
  SpikeRecord spikes;    // outputs of every spiking layer
  SpikeRecord synapses;  // inputs of every MAC site, same order as sites()
  // Pre-reset membrane potentials, [spiking layer][step], each [batch, ...].
  std::vector<std::vector<ad::Tensor>> membranes;
  // Spikes emitted, same indexing as membranes.
  std::vector<std::vector<ad::Tensor>> outputs;
};

// Persistent non-parameter state (normalization running statistics).
struct NamedBuffer {
  std::string name;
  std::vector<real>* data;
};

class Layer;
struct ForwardContext;

class Network {
 public:
  // `sample_shape` is one sample at one time step, e.g. [features] or
  // [channels, H, W]. Weights are drawn from Rng(seed).
  Network(NetworkSpec spec, const Shape& sample_shape, std::uint64_t seed);
  ~Network();
  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;

  // `x` holds T * batch rows, step-major: rows [t*batch, (t+1)*batch) are
  // step t. Membranes start at zero.
  ForwardResult forward(const ad::Tensor& x, std::size_t batch,
                        const ForwardOptions& opts = {});

  std::vector<ad::Parameter*> parameters();
  std::vector<NamedBuffer> buffers();
  void zero_grad();

  // Stops (or resumes) gradient flow into the surrogate steepness grid.
  void freeze_tsg(bool frozen);

  std::size_t spiking_layers() const { return spiking_.size(); }
  const std::string& spiking_name(std::size_t l) const;
  // Effective steepness of spiking layer l at step t.
  real alpha(std::size_t t, std::size_t l) const;
  surrogate::TsgParams tsg_params() const;

  const std::vector<MacSite>& sites() const { return sites_; }
  const NetworkSpec& spec() const { return spec_; }
  const Shape& sample_shape() const { return sample_shape_; }
  const Shape& output_shape() const { return output_shape_; }

 private:
  friend class SpikingLayer;
  friend class Builder;

  NetworkSpec spec_;
  Shape sample_shape_;
  Shape output_shape_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<class SpikingLayer*> spiking_;
  std::vector<MacSite> sites_;
};

// Voting readout over spikes s [T * batch, neurons] (step-major):
//   O[b, c] = 1/(T g) sum_t sum_{j < g} s[t, b, c g + j],  g = neurons / classes
// i.e. M maps each class to an equal population whose votes are averaged.
ad::Tensor voting(const ad::Tensor& s, std::size_t steps, std::size_t batch,
                  std::size_t classes);

// MAC sites of a spec without keeping the network.
std::vector<MacSite> plan_sites(const NetworkSpec& spec, const Shape& sample_shape);

}  // namespace cfsnn::train
