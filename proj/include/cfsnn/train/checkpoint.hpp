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

// Checkpoint file layout (all integers little-endian):
//
//   8 bytes   magic "SNNCKPT1"
//   u32       format version
//   u32       metadata length n
//   n bytes   JSON metadata: network spec, per-sample input shape, epoch,
//             RNG state, and the name and extent of every blob
//   blobs     float64 values in declaration order: parameters, then their
//             momentum buffers, then normalization running statistics
//
// Loading reads and validates the whole file before touching any network.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfsnn/core/rng.hpp"
#include "cfsnn/train/network.hpp"

namespace cfsnn::train {

inline constexpr char kCheckpointMagic[9] = "SNNCKPT1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Blob {
  std::string name;
  std::vector<double> values;
};

struct Checkpoint {
  NetworkSpec spec;
  Shape sample_shape;
  std::size_t epoch = 0;
  Rng::State rng{};
  nlohmann::json extra;  // free-form, e.g. the run configuration
  std::vector<Blob> params;
  std::vector<Blob> momenta;
  std::vector<Blob> buffers;
};

Checkpoint snapshot(Network& net, std::size_t epoch, const Rng::State& rng,
                    nlohmann::json extra = nlohmann::json::object());

// Writes to a temporary file and renames it into place.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
void save_checkpoint(const std::string& path, Network& net, std::size_t epoch,
                     const Rng::State& rng,
                     nlohmann::json extra = nlohmann::json::object());

// Throws FormatError on a bad magic, version, or truncated/inconsistent
// payload; IoError when the file cannot be read.
Checkpoint load_checkpoint(const std::string& path);

// Copies parameters, momenta and buffers into a network built from the same
// spec; throws before modifying anything if names or sizes disagree.
void restore(const Checkpoint& ckpt, Network& net);

// Builds the network described by the checkpoint and restores it.
Network network_from_checkpoint(const Checkpoint& ckpt);

}  // namespace cfsnn::train
