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

// Run configuration: a JSON document whose top-level sections mirror the
// module configs, plus dotted key=value overrides from the command line.
//
//   {
//     "seed": 0,
//     "network":   {"T": 4, "bn_eps": 1e-5, "layers": [...]},
//     "neuron":    {"kind": "cf", "k_tau": 0.25, ...},
//     "surrogate": {"family": "tsg", "tsg": {"scale": 4, ...}},
//     "loss":      {"lambda": 0.25, "epsilon": 1e-6, ...},
//     "train":     {"lr": 0.025, "epochs": 20, ...},
//     "data":      {"kind": "gaussians", "n_train": 1000, ...},
//     "encoder":   {"mode": "direct"},
//     "noise":     "none",
//     "eval":      {"batch_size": 256, "threads": 1},
//     "energy":    {"count_mode": "magnitude", "first_layer": "sop"},
//     "gradcheck": {"h": 1e-5, "batch": 4, ...},
//     "inspect":   {"samples": 256, "lo": -3, "hi": 3, "width": 0.25},
//     "output":    {"dir": "runs/default"}
//   }
//
// Every section and key is checked; anything unknown is a ConfigError that
// names its dotted path.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfsnn/data/dataset.hpp"
#include "cfsnn/energy/energy.hpp"
#include "cfsnn/loss/loss.hpp"
#include "cfsnn/train/gradcheck.hpp"
#include "cfsnn/train/spec.hpp"

namespace cfsnn::cli {

struct DataConfig {
  std::string kind = "gaussians";  // gaussians|two_moons|temporal_xor|idx|csv
  std::size_t n_train = 1000;
  std::size_t n_test = 400;
  data::SynthConfig synth;
  std::size_t classes = 10;  // idx and csv
  std::string train_images, train_labels, test_images, test_labels;
  std::string train_csv, test_csv;
  bool augment = false;

  bool synthetic() const { return kind != "idx" && kind != "csv"; }
};

struct EvalConfig {
  std::size_t batch_size = 256;
  std::size_t threads = 1;
};

struct EnergyConfig {
  SpikeRecord::CountMode count_mode = SpikeRecord::CountMode::kMagnitude;
  energy::FirstLayer first_layer = energy::FirstLayer::kSop;
};

struct GradcheckConfig {
  train::GradcheckOptions options;
  std::size_t batch = 4;
  std::size_t max_params = 10000;
};

struct InspectConfig {
  std::size_t samples = 256;
  BinSpec bins;
};

struct RunConfig {
  std::uint64_t seed = 0;
  train::NetworkSpec network;
  bool default_layers = false;  // layers were filled in from the data shape
  loss::LossConfig loss;
  train::TrainConfig train;
  DataConfig data;
  data::EncoderConfig encoder;
  data::NoiseSpec noise;
  EvalConfig eval;
  EnergyConfig energy;
  GradcheckConfig gradcheck;
  InspectConfig inspect;
  std::string out_dir = "runs/default";
};

// Reads a JSON file; IoError if unreadable, ConfigError if malformed.
nlohmann::json load_json_file(const std::string& path);

// Applies "a.b.c=value". The value is parsed as JSON when possible and taken
// as a string otherwise; intermediate objects are created as needed.
void apply_override(nlohmann::json& j, const std::string& assignment);

// Validates the whole document and returns the typed configuration. Layers
// left unspecified are chosen from the dataset's sample shape.
RunConfig parse_run_config(const nlohmann::json& j);

// The effective configuration in the same schema, suitable for reloading.
nlohmann::json to_json(const RunConfig& c);

// Default layer stack for a per-step input shape and class count.
std::vector<train::LayerSpec> default_layers(const Shape& step_shape,
                                             std::size_t classes);

struct Datasets {
  data::Dataset train;
  data::Dataset test;
};

// Loads or generates both splits; the noise setting is applied to the test
// split only.
Datasets load_datasets(const RunConfig& c);

// Fills in default layers if none were given and validates the network
// against the data it will see.
void resolve_network(RunConfig& c, const data::Dataset& ds);

}  // namespace cfsnn::cli
