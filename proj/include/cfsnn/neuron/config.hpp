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

#include <string>

#include "cfsnn/core/types.hpp"

namespace cfsnn {

enum class NeuronKind { kLif, kCf };
enum class ResetMode { kHard, kSoft };

// Parameters of one spiking layer.
//
// LIF fires when u >= theta_p (H(0) = 1). CF fires with strict inequalities,
// emitting a signed count in [-k_n_max, k_p_max]; theta_n is negative and the
// spike sign follows the side that fired.
struct NeuronConfig {
  NeuronKind kind = NeuronKind::kCf;
  real k_tau = real(0.25);
  real theta_p = real(1.0);
  real theta_n = real(-1.0);
  int k_p_max = 2;
  int k_n_max = 2;
  ResetMode reset_mode = ResetMode::kSoft;
  real u_reset = real(0);

  // Throws ConfigError on a violated invariant.
  void validate() const;

  // LIF threshold.
  real theta() const { return theta_p; }
};

NeuronKind parse_neuron_kind(const std::string& s);
ResetMode parse_reset_mode(const std::string& s);
std::string to_string(NeuronKind k);
std::string to_string(ResetMode m);

}  // namespace cfsnn
