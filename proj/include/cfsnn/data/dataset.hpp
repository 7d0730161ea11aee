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
#include <span>
#include <string>
#include <vector>

#include "cfsnn/autodiff/tensor.hpp"
#include "cfsnn/core/rng.hpp"

namespace cfsnn::data {

struct Dataset {
  // Extents of one sample. Temporal datasets carry their own leading time
  // axis ([T, ...]); static ones do not.
  Shape sample_shape;
  std::vector<real> features;  // size() * sample_shape.numel() values
  std::vector<std::size_t> labels;
  std::size_t classes = 0;
  std::string split = "train";
  bool temporal = false;
  // Declared value range. Bounded data (images) is clamped after noise.
  bool bounded = false;
  real lo = 0;
  real hi = 1;

  std::size_t size() const { return labels.size(); }
  std::size_t sample_numel() const { return sample_shape.numel(); }
  std::span<const real> sample(std::size_t i) const {
    return std::span<const real>(features).subspan(i * sample_numel(),
                                                   sample_numel());
  }
  // Throws on inconsistent sizes or an out-of-range label.
  void validate() const;
};

// --- IDX (big-endian, magic 0x00000803 images / 0x00000801 labels) ---

// Pixels are scaled by 1/255; samples are [1, rows, cols].
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t classes = 10, const std::string& split = "train");

// Writes a bounded [1, rows, cols] dataset back to IDX, rounding values to
// bytes. Used by the conversion tool and tests.
void write_idx(const Dataset& ds, const std::string& images_path,
               const std::string& labels_path);

// --- CSV: header row, feature columns, then an integer label column ---

Dataset load_csv(const std::string& path, std::size_t classes = 0,
                 const std::string& split = "train");

// --- synthetic tasks ---

enum class SynthKind { kGaussians, kTwoMoons, kTemporalXor };

SynthKind parse_synth_kind(const std::string& s);
std::string to_string(SynthKind k);

struct SynthConfig {
  SynthKind kind = SynthKind::kGaussians;
  std::size_t classes = 2;
  std::size_t dims = 2;
  // Gaussians: distance between neighbouring class means in units of the
  // (unit) cluster standard deviation.
  real separation = real(6.0);
  // Two moons: standard deviation of the added noise.
  real noise = real(0.1);
  // Temporal xor: sequence length.
  std::size_t steps = 4;
};

// Deterministic in (cfg, n, seed). Train and test splits use different
// streams of the seed, so they never share a draw.
//
// gaussians    class c centred at radius r on a circle in the first two
//              dimensions (two classes: +-separation/2 on axis 0), unit
//              isotropic noise, labels balanced.
// two_moons    the usual interleaved half circles, two classes.
// temporal_xor sample [T, 2]: channel A switches on at step t_a and channel
//              B at t_b (t_a != t_b) and both stay on; the label is 1 when A
//              came first. With T = 1 both are on at step 0 and the label is
//              a balanced coin flip, so the sample carries no information.
Dataset synth_dataset(const SynthConfig& cfg, std::size_t n, std::uint64_t seed,
                      const std::string& split = "train");

// --- spike encoding ---

enum class EncodeMode { kDirect, kRate, kSequence };

EncodeMode parse_encode_mode(const std::string& s);
std::string to_string(EncodeMode m);

struct EncoderConfig {
  EncodeMode mode = EncodeMode::kDirect;
  std::size_t steps = 4;
};

// Per-step input shape the network sees for this dataset.
Shape step_shape(const Dataset& ds, const EncoderConfig& cfg);

// One sample to T rows:
//   direct    x repeated T times
//   rate      Bernoulli(x) per element and step (x must lie in [0, 1])
//   sequence  the sample's own time axis, which must have length T
std::vector<real> encode_input(std::span<const real> x, const EncoderConfig& cfg,
                               Rng& rng);

// Samples `indices` as a [T * batch, step shape...] tensor, step-major.
ad::Tensor encode_batch(const Dataset& ds, std::span<const std::size_t> indices,
                        const EncoderConfig& cfg, Rng& rng);

// --- noise ---

enum class NoiseKind { kNone, kUniform, kSaltPepper, kGaussian };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  real epsilon = 0;

  // "uniform:0.1", "salt_pepper:0.05", "gaussian:0.2" or "none".
  static NoiseSpec parse(const std::string& s);
  std::string str() const;
  void validate() const;
};

// uniform      x + eps * U(-1, 1)
// gaussian     x + eps * N(0, 1)
// salt_pepper  each element independently, with probability eps, becomes
//              lo or hi with equal odds
// Results are clamped to [lo, hi] when `bounded`.
void inject_noise(std::span<real> x, const NoiseSpec& noise, Rng& rng,
                  bool bounded, real lo, real hi);

// Copy of `ds` with noise applied to every sample.
Dataset with_noise(const Dataset& ds, const NoiseSpec& noise, std::uint64_t seed);

// Random horizontal flip and shifted crop (zero padding `pad`) for
// [C, H, W] samples.
void augment_flip_crop(std::span<real> sample, const Shape& shape,
                       std::size_t pad, Rng& rng);

}  // namespace cfsnn::data
