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

#include <cmath>
#include <numbers>

#include "cfsnn/data/dataset.hpp"

namespace cfsnn::data {

SynthKind parse_synth_kind(const std::string& s) {
  if (s == "gaussians") return SynthKind::kGaussians;
  if (s == "two_moons") return SynthKind::kTwoMoons;
  if (s == "temporal_xor") return SynthKind::kTemporalXor;
  throw ConfigError("unknown synthetic dataset '" + s +
                    "' (expected gaussians, two_moons or temporal_xor)");
}

std::string to_string(SynthKind k) {
  switch (k) {
    case SynthKind::kGaussians: return "gaussians";
    case SynthKind::kTwoMoons: return "two_moons";
    case SynthKind::kTemporalXor: return "temporal_xor";
  }
  return "?";
}

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<std::size_t> balanced_labels(std::size_t n, std::size_t classes,
                                         Rng& rng) {
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % classes;
  rng.shuffle(std::span<std::size_t>(labels));
  return labels;
}

void gaussians(Dataset& ds, const SynthConfig& cfg, Rng& rng) {
  if (cfg.dims < 2 && cfg.classes > 2)
    throw ConfigError("data.dims must be >= 2 for more than two gaussian classes");
  if (cfg.dims < 1) throw ConfigError("data.dims must be >= 1");
  ds.sample_shape = Shape{cfg.dims};
  const std::size_t n = ds.labels.size();
  ds.features.assign(n * cfg.dims, 0);
  // Neighbouring means sit `separation` apart.
  const double sep = cfg.separation;
  const double radius =
      cfg.classes == 2 ? sep / 2 : sep / (2 * std::sin(kPi / cfg.classes));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = ds.labels[i];
    const double ang = 2 * kPi * static_cast<double>(c) / cfg.classes;
    real* x = &ds.features[i * cfg.dims];
    for (std::size_t d = 0; d < cfg.dims; ++d) x[d] = static_cast<real>(rng.normal());
    if (cfg.classes == 2) {
      x[0] += static_cast<real>(c == 0 ? -radius : radius);
    } else {
      x[0] += static_cast<real>(radius * std::cos(ang));
      x[1] += static_cast<real>(radius * std::sin(ang));
    }
  }
}

void two_moons(Dataset& ds, const SynthConfig& cfg, Rng& rng) {
  if (cfg.classes != 2) throw ConfigError("two_moons has exactly two classes");
  ds.sample_shape = Shape{2};
  const std::size_t n = ds.labels.size();
  ds.features.assign(n * 2, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform(0, kPi);
    double x = std::cos(a), y = std::sin(a);
    if (ds.labels[i] == 1) {
      x = 1 - x;
      y = 0.5 - y;
    }
    ds.features[2 * i] = static_cast<real>(x + cfg.noise * rng.normal());
    ds.features[2 * i + 1] = static_cast<real>(y + cfg.noise * rng.normal());
  }
}

void temporal_xor(Dataset& ds, const SynthConfig& cfg, Rng& rng) {
  if (cfg.classes != 2) throw ConfigError("temporal_xor has exactly two classes");
  const std::size_t T = cfg.steps;
  if (T == 0) throw ConfigError("temporal_xor needs at least one step");
  ds.sample_shape = Shape{T, 2};
  ds.temporal = true;
  ds.bounded = true;
  const std::size_t n = ds.labels.size();
  ds.features.assign(n * T * 2, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t ta = 0, tb = 0;
    if (T >= 2) {
      std::size_t first = rng.below(T - 1);
      std::size_t second = first + 1 + rng.below(T - 1 - first);
      // label 1: A first
      ta = ds.labels[i] == 1 ? first : second;
      tb = ds.labels[i] == 1 ? second : first;
    }
    real* x = &ds.features[i * T * 2];
    for (std::size_t t = 0; t < T; ++t) {
      x[2 * t] = t >= ta ? real(1) : real(0);
      x[2 * t + 1] = t >= tb ? real(1) : real(0);
    }
  }
}

}  // namespace

Dataset synth_dataset(const SynthConfig& cfg, std::size_t n, std::uint64_t seed,
                      const std::string& split) {
  if (cfg.classes < 2) throw ConfigError("synthetic data needs >= 2 classes");
  if (n < 10 * cfg.classes)
    throw ConfigError("synthetic data needs at least 10 samples per class, got " +
                      std::to_string(n) + " for " + std::to_string(cfg.classes) +
                      " classes");
  Rng rng = Rng(seed).split(split == "test" ? 2 : 1);
  Dataset ds;
  ds.classes = cfg.classes;
  ds.split = split;
  ds.labels = balanced_labels(n, cfg.classes, rng);
  switch (cfg.kind) {
    case SynthKind::kGaussians: gaussians(ds, cfg, rng); break;
    case SynthKind::kTwoMoons: two_moons(ds, cfg, rng); break;
    case SynthKind::kTemporalXor: temporal_xor(ds, cfg, rng); break;
  }
  ds.validate();
  return ds;
}

}  // namespace cfsnn::data
