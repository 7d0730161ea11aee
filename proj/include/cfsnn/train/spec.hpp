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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfsnn/neuron/config.hpp"
#include "cfsnn/surrogate/surrogate.hpp"

namespace cfsnn::train {

enum class LayerType {
  kLinear,
  kConv2d,
  kTdbn,
  kSpiking,
  kResidual,
  kPool,
  kFlatten,
  kVoting,
};

struct LayerSpec {
  LayerType type = LayerType::kLinear;
  std::size_t out = 0;      // linear width, conv/residual channels
  std::size_t kernel = 3;   // conv kernel, pool window
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool bias = true;
  bool max_pool = false;
  std::size_t classes = 0;  // voting
  // Per-layer neuron kind; the network default applies when unset.
  std::optional<NeuronKind> neuron_kind;
};

struct TsgInit {
  real scale = real(4.0);
  real bias = real(0.5);
  real init_x = real(0.0);
};

// Architecture plus everything the spiking layers need.
struct NetworkSpec {
  std::size_t steps = 4;  // T
  std::vector<LayerSpec> layers;
  NeuronConfig neuron;
  surrogate::SurrogateSpec surrogate;
  TsgInit tsg;
  real bn_eps = real(1e-5);

  // Structural checks: one terminating voting layer fed by a spiking layer,
  // every spiking layer preceded by an affine or normalization layer, every
  // residual block followed by a spiking layer, T >= 1.
  void validate() const;
  std::size_t classes() const;
};

std::string to_string(LayerType t);
LayerType parse_layer_type(const std::string& s);

// JSON forms. Readers reject unknown keys with the offending dotted path.
nlohmann::json to_json(const LayerSpec& l);
LayerSpec layer_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json to_json(const NeuronConfig& c);
NeuronConfig neuron_from_json(const nlohmann::json& j, const std::string& path,
                              NeuronConfig base = {});

nlohmann::json to_json(const surrogate::SurrogateSpec& s, const TsgInit& t);
void surrogate_from_json(const nlohmann::json& j, const std::string& path,
                         surrogate::SurrogateSpec& s, TsgInit& t);

// {"T":..,"layers":[..],"bn_eps":..,"neuron":{..},"surrogate":{..}}
nlohmann::json to_json(const NetworkSpec& n);
NetworkSpec network_from_json(const nlohmann::json& j);

enum class Schedule { kCosine, kConstant };

struct TrainConfig {
  real lr = real(0.025);
  real momentum = real(0.9);
  real weight_decay = real(1e-4);
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  Schedule schedule = Schedule::kCosine;
  // Separate step size for the surrogate steepness parameters.
  std::optional<real> tsg_lr;
  // Save a checkpoint every n epochs (0 = only the final one).
  std::size_t checkpoint_every = 0;
  bool freeze_tsg = false;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace cfsnn::train
