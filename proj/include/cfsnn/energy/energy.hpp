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

// Theoretical inference energy of a spiking network.
//
//   SOPs(l)   = f_r(l) * T * FLOPs(l)
//   E_snn     = 77 fJ * sum_l SOPs(l)
//   E_ann     = 12.5 pJ * sum_l FLOPs(l)
//
// FLOPs are multiply-accumulate counts per sample and time step, and f_r(l)
// is the mean spike magnitude per input element per step of layer l. A layer
// fed by the analog encoded input has no spikes to count; it is reported
// both as SOPs (using its mean input magnitude) and as MACs executed every
// step, and `first_layer` selects which one enters the total.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cfsnn/neuron/neuron.hpp"
#include "cfsnn/train/network.hpp"

namespace cfsnn::energy {

inline constexpr double kJoulesPerSop = 77e-15;
inline constexpr double kJoulesPerFlop = 12.5e-12;

struct LayerFlops {
  std::string name;
  std::uint64_t flops = 0;
  bool analog_input = false;
};

enum class FirstLayer { kSop, kMac };
FirstLayer parse_first_layer(const std::string& s);
std::string to_string(FirstLayer f);

std::vector<LayerFlops> count_flops(const train::NetworkSpec& spec,
                                    const Shape& sample_shape);
std::vector<LayerFlops> count_flops(const train::Network& net);

// Per-layer firing rates of the inputs recorded for `layers`. Throws when the
// record is empty or lacks a layer.
std::vector<double> measure_firing_rate(
    const SpikeRecord& inputs, const std::vector<LayerFlops>& layers,
    SpikeRecord::CountMode mode = SpikeRecord::CountMode::kMagnitude);

struct LayerEnergy {
  std::string name;
  std::uint64_t flops = 0;
  double rate = 0;
  double sops = 0;
  double snn_joules = 0;  // under the selected convention
  double ann_joules = 0;
  bool analog_input = false;
};

struct EnergyReport {
  std::size_t steps = 0;
  FirstLayer first_layer = FirstLayer::kSop;
  std::vector<LayerEnergy> layers;
  double total_sops = 0;
  double total_flops = 0;
  double snn_joules = 0;
  double ann_joules = 0;
  // Analog-input layers under each convention.
  double analog_sop_joules = 0;
  double analog_mac_joules = 0;
};

EnergyReport estimate_energy(const std::vector<LayerFlops>& layers,
                             const std::vector<double>& rates, std::size_t steps,
                             FirstLayer first_layer = FirstLayer::kSop);

double sop_joules(double sops);
double flop_joules(double flops);

// Columns: layer,macs,firing_rate,gsops,snn_mj,ann_mj,analog_input, then a
// total row.
void write_csv(std::ostream& os, const EnergyReport& r);
// key: value lines with units in the key names.
void write_summary(std::ostream& os, const EnergyReport& r);

}  // namespace cfsnn::energy
