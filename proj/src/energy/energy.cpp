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

#include "cfsnn/energy/energy.hpp"

#include <cstdio>
#include <ostream>

namespace cfsnn::energy {

FirstLayer parse_first_layer(const std::string& s) {
  if (s == "sop") return FirstLayer::kSop;
  if (s == "mac") return FirstLayer::kMac;
  throw ConfigError("unknown energy.first_layer '" + s + "' (expected sop or mac)");
}

std::string to_string(FirstLayer f) { return f == FirstLayer::kSop ? "sop" : "mac"; }

namespace {
std::vector<LayerFlops> from_sites(const std::vector<train::MacSite>& sites) {
  std::vector<LayerFlops> out;
  for (const auto& s : sites) out.push_back({s.name, s.flops, s.network_input});
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}
}  // namespace

std::vector<LayerFlops> count_flops(const train::NetworkSpec& spec,
                                    const Shape& sample_shape) {
  return from_sites(train::plan_sites(spec, sample_shape));
}

std::vector<LayerFlops> count_flops(const train::Network& net) {
  return from_sites(net.sites());
}

std::vector<double> measure_firing_rate(const SpikeRecord& inputs,
                                        const std::vector<LayerFlops>& layers,
                                        SpikeRecord::CountMode mode) {
  if (inputs.empty() || inputs.batches() == 0)
    throw Error("firing rates need a record covering at least one batch");
  std::vector<double> rates;
  for (const auto& l : layers) {
    bool found = false;
    for (std::size_t i = 0; i < inputs.layers(); ++i)
      if (inputs.name(i) == l.name) {
        rates.push_back(inputs.firing_rate(i, mode));
        found = true;
        break;
      }
    if (!found) throw Error("no recorded input for layer '" + l.name + "'");
  }
  return rates;
}

double sop_joules(double sops) { return kJoulesPerSop * sops; }
double flop_joules(double flops) { return kJoulesPerFlop * flops; }

EnergyReport estimate_energy(const std::vector<LayerFlops>& layers,
                             const std::vector<double>& rates, std::size_t steps,
                             FirstLayer first_layer) {
  if (rates.size() != layers.size())
    throw ShapeError("estimate_energy: " + std::to_string(rates.size()) +
                     " rates for " + std::to_string(layers.size()) + " layers");
  EnergyReport r;
  r.steps = steps;
  r.first_layer = first_layer;
  const double T = static_cast<double>(steps);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerEnergy e;
    e.name = layers[i].name;
    e.flops = layers[i].flops;
    e.rate = rates[i];
    e.analog_input = layers[i].analog_input;
    const double flops = static_cast<double>(e.flops);
    e.sops = e.rate * T * flops;
    e.ann_joules = flop_joules(flops);
    if (e.analog_input) {
      r.analog_sop_joules += sop_joules(e.sops);
      r.analog_mac_joules += flop_joules(T * flops);
    }
    if (e.analog_input && first_layer == FirstLayer::kMac) {
      e.snn_joules = flop_joules(T * flops);
    } else {
      e.snn_joules = sop_joules(e.sops);
      r.total_sops += e.sops;
    }
    r.total_flops += flops;
    r.snn_joules += e.snn_joules;
    r.ann_joules += e.ann_joules;
    r.layers.push_back(e);
  }
  return r;
}

void write_csv(std::ostream& os, const EnergyReport& r) {
  os << "layer,macs,firing_rate,gsops,snn_mj,ann_mj,analog_input\n";
  for (const auto& e : r.layers)
    os << e.name << ',' << e.flops << ',' << fmt(e.rate) << ',' << fmt(e.sops / 1e9)
       << ',' << fmt(e.snn_joules * 1e3) << ',' << fmt(e.ann_joules * 1e3) << ','
       << (e.analog_input ? 1 : 0) << '\n';
  os << "total," << fmt(r.total_flops) << ",," << fmt(r.total_sops / 1e9) << ','
     << fmt(r.snn_joules * 1e3) << ',' << fmt(r.ann_joules * 1e3) << ",\n";
}

void write_summary(std::ostream& os, const EnergyReport& r) {
  os << "T: " << r.steps << '\n'
     << "first_layer: " << to_string(r.first_layer) << '\n'
     << "total_gsops: " << fmt(r.total_sops / 1e9) << '\n'
     << "total_gflops: " << fmt(r.total_flops / 1e9) << '\n'
     << "snn_energy_mj: " << fmt(r.snn_joules * 1e3) << '\n'
     << "ann_energy_mj: " << fmt(r.ann_joules * 1e3) << '\n'
     << "analog_layer_sop_mj: " << fmt(r.analog_sop_joules * 1e3) << '\n'
     << "analog_layer_mac_mj: " << fmt(r.analog_mac_joules * 1e3) << '\n';
}

}  // namespace cfsnn::energy
