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

// Surrogate derivatives for the firing nonlinearity.
//
// Fixed families take a constant steepness alpha; the time-step-wise family
// (tsg) uses the same piecewise-linear triangles with a learnable
// alpha(t, l) = scale * sigmoid(x(t, l)) + bias. For multi-level (CF)
// neurons the derivative of the spike count is the sum of one surrogate per
// firing level, positive levels centred at k * theta_p and negative levels at
// k * theta_n. The negative levels contribute positively, since the count
// -sum_k [u < k * theta_n] increases with u.

#include <string>
#include <vector>

#include "cfsnn/core/types.hpp"
#include "cfsnn/neuron/config.hpp"

namespace cfsnn::surrogate {

enum class Family { kRectangular, kPlg, kCfRectangular, kTsg };
enum class Composition { kSum, kNearest };
enum class Side { kPositive, kNegative };

struct SurrogateSpec {
  Family family = Family::kTsg;
  real alpha = real(1.0);
  Composition composition = Composition::kSum;

  void validate() const;
};

Family parse_family(const std::string& s);
Composition parse_composition(const std::string& s);
std::string to_string(Family f);
std::string to_string(Composition c);

// 1/alpha on |u - theta| < alpha/2, 0 elsewhere.
real sg_rectangular(real u, real theta, real alpha);
// max(0, alpha * (1 - alpha * |u - theta|)).
real sg_plg(real u, real theta, real alpha);
// alpha on the whole firing range of a CF neuron: (theta_p/2,
// (2 K_P + 1) theta_p / 2) for u >= 0, mirrored with |theta_n| for u < 0.
real sg_cf_rect(real u, const NeuronConfig& cfg, real alpha);

// Learnable steepness grid, one x per (time step, layer).
struct TsgParams {
  std::size_t steps = 0;
  std::size_t layers = 0;
  std::vector<real> x;  // x[t * layers + l]
  real scale = real(4.0);
  real bias = real(0.5);

  TsgParams() = default;
  TsgParams(std::size_t steps, std::size_t layers, real init_x = 0,
            real scale = 4.0, real bias = 0.5);
};

real sigmoid(real x);
// scale * sigmoid(x(t, l)) + bias; throws on an out-of-range index.
real tsg_alpha(const TsgParams& p, std::size_t t, std::size_t l);
// d alpha / d x = scale * sigmoid(x) * (1 - sigmoid(x)).
real tsg_alpha_dx(const TsgParams& p, std::size_t t, std::size_t l);

// PLG triangle of level k on the given side.
real tsg_eval(real u, int k, Side side, real alpha, const NeuronConfig& cfg);
// Sum of tsg_eval over all positive and negative levels.
real cf_total_grad(real u, real alpha, const NeuronConfig& cfg);
// S(u) = integral_0^u cf_total_grad(x) dx, in closed form.
real smoothed_forward(real u, real alpha, const NeuronConfig& cfg);

// The per-element rule installed on a spiking layer.
//
// grad()         surrogate for d s / d u
// smooth()       antiderivative S(u) with S(0) = 0; a differentiable stand-in
//                for the spike count whose exact derivative is grad()
// smooth_dalpha  d S / d alpha, the steepness gradient used when alpha is
//                learnable
class SurrogateRule {
 public:
  SurrogateRule(const SurrogateSpec& spec, const NeuronConfig& cfg);

  real grad(real u, real alpha) const;
  real smooth(real u, real alpha) const;
  real smooth_dalpha(real u, real alpha) const;

  bool supports_smoothing() const {
    return spec_.composition == Composition::kSum;
  }
  const SurrogateSpec& spec() const { return spec_; }
  bool learnable() const { return spec_.family == Family::kTsg; }

 private:
  real level_grad(real u, real c, real alpha) const;
  real level_cdf(real u, real c, real alpha) const;
  real level_cdf_dalpha(real u, real c, real alpha) const;
  real cf_rect_integral(real u, real alpha) const;

  SurrogateSpec spec_;
  NeuronConfig cfg_;
  std::vector<real> centers_;
};

}  // namespace cfsnn::surrogate
