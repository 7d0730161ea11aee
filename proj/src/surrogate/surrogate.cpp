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

#include "cfsnn/surrogate/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cfsnn::surrogate {

void SurrogateSpec::validate() const {
  if (family != Family::kTsg && !(alpha > 0))
    throw ConfigError("surrogate.alpha must be positive, got " +
                      std::to_string(alpha));
}

Family parse_family(const std::string& s) {
  if (s == "rectangular") return Family::kRectangular;
  if (s == "plg") return Family::kPlg;
  if (s == "cf_rectangular") return Family::kCfRectangular;
  if (s == "tsg") return Family::kTsg;
  throw ConfigError("unknown surrogate family '" + s +
                    "' (expected rectangular, plg, cf_rectangular or tsg)");
}

Composition parse_composition(const std::string& s) {
  if (s == "sum") return Composition::kSum;
  if (s == "nearest") return Composition::kNearest;
  throw ConfigError("unknown surrogate composition '" + s +
                    "' (expected sum or nearest)");
}

std::string to_string(Family f) {
  switch (f) {
    case Family::kRectangular: return "rectangular";
    case Family::kPlg: return "plg";
    case Family::kCfRectangular: return "cf_rectangular";
    case Family::kTsg: return "tsg";
  }
  return "?";
}

std::string to_string(Composition c) {
  return c == Composition::kSum ? "sum" : "nearest";
}

real sg_rectangular(real u, real theta, real alpha) {
  return std::abs(u - theta) < alpha / 2 ? real(1) / alpha : real(0);
}

real sg_plg(real u, real theta, real alpha) {
  return std::max(real(0), alpha * (real(1) - alpha * std::abs(u - theta)));
}

real sg_cf_rect(real u, const NeuronConfig& cfg, real alpha) {
  if (u >= 0) {
    const real kp = static_cast<real>(cfg.k_p_max);
    return std::abs(u - (kp + 1) / 2 * cfg.theta_p) < cfg.theta_p * kp / 2
               ? alpha
               : real(0);
  }
  // Window half-width uses |theta_n|; the centre keeps the negative sign.
  const real kn = static_cast<real>(cfg.k_n_max);
  const real mag = std::abs(cfg.theta_n);
  return std::abs(u - (kn + 1) / 2 * cfg.theta_n) < mag * kn / 2 ? alpha
                                                                  : real(0);
}

TsgParams::TsgParams(std::size_t steps_, std::size_t layers_, real init_x,
                     real scale_, real bias_)
    : steps(steps_),
      layers(layers_),
      x(steps_ * layers_, init_x),
      scale(scale_),
      bias(bias_) {}

real sigmoid(real x) { return real(1) / (real(1) + std::exp(-x)); }

namespace {
std::size_t tsg_index(const TsgParams& p, std::size_t t, std::size_t l) {
  if (t >= p.steps || l >= p.layers)
    throw std::out_of_range("tsg index (t=" + std::to_string(t) +
                            ", l=" + std::to_string(l) + ") outside a " +
                            std::to_string(p.steps) + "x" +
                            std::to_string(p.layers) + " grid");
  return t * p.layers + l;
}

// Cumulative area of a unit triangle in scaled distance z = alpha (u - c).
real tri_cdf(real z) {
  if (z <= -1) return 0;
  if (z <= 0) return (1 + z) * (1 + z) / 2;
  if (z < 1) return 1 - (1 - z) * (1 - z) / 2;
  return 1;
}
real tri_pdf(real z) { return std::max(real(0), real(1) - std::abs(z)); }
}  // namespace

real tsg_alpha(const TsgParams& p, std::size_t t, std::size_t l) {
  return p.scale * sigmoid(p.x[tsg_index(p, t, l)]) + p.bias;
}

real tsg_alpha_dx(const TsgParams& p, std::size_t t, std::size_t l) {
  const real s = sigmoid(p.x[tsg_index(p, t, l)]);
  return p.scale * s * (1 - s);
}

real tsg_eval(real u, int k, Side side, real alpha, const NeuronConfig& cfg) {
  const int bound = side == Side::kPositive ? cfg.k_p_max : cfg.k_n_max;
  if (k < 1 || k > bound)
    throw std::out_of_range("surrogate level " + std::to_string(k) +
                            " outside [1, " + std::to_string(bound) + "]");
  const real center =
      static_cast<real>(k) * (side == Side::kPositive ? cfg.theta_p : cfg.theta_n);
  return sg_plg(u, center, alpha);
}

real cf_total_grad(real u, real alpha, const NeuronConfig& cfg) {
  real g = 0;
  for (int k = 1; k <= cfg.k_p_max; ++k)
    g += tsg_eval(u, k, Side::kPositive, alpha, cfg);
  for (int k = 1; k <= cfg.k_n_max; ++k)
    g += tsg_eval(u, k, Side::kNegative, alpha, cfg);
  return g;
}

real smoothed_forward(real u, real alpha, const NeuronConfig& cfg) {
  NeuronConfig c = cfg;
  c.kind = NeuronKind::kCf;
  return SurrogateRule({Family::kPlg, alpha, Composition::kSum}, c)
      .smooth(u, alpha);
}

SurrogateRule::SurrogateRule(const SurrogateSpec& spec, const NeuronConfig& cfg)
    : spec_(spec), cfg_(cfg) {
  spec_.validate();
  if (cfg.kind == NeuronKind::kLif) {
    centers_.push_back(cfg.theta_p);
    // The whole-range rectangle of a single-level neuron spans (θ/2, 3θ/2).
    cfg_.k_p_max = 1;
    cfg_.k_n_max = 0;
  } else {
    for (int k = 1; k <= cfg.k_p_max; ++k)
      centers_.push_back(static_cast<real>(k) * cfg.theta_p);
    for (int k = 1; k <= cfg.k_n_max; ++k)
      centers_.push_back(static_cast<real>(k) * cfg.theta_n);
  }
}

real SurrogateRule::level_grad(real u, real c, real alpha) const {
  if (spec_.family == Family::kRectangular) return sg_rectangular(u, c, alpha);
  return sg_plg(u, c, alpha);
}

real SurrogateRule::level_cdf(real u, real c, real alpha) const {
  if (spec_.family == Family::kRectangular)
    return std::clamp((u - c) / alpha + real(0.5), real(0), real(1));
  return tri_cdf(alpha * (u - c));
}

real SurrogateRule::level_cdf_dalpha(real u, real c, real alpha) const {
  if (spec_.family == Family::kRectangular)
    return std::abs(u - c) < alpha / 2 ? -(u - c) / (alpha * alpha) : real(0);
  return tri_pdf(alpha * (u - c)) * (u - c);
}

real SurrogateRule::cf_rect_integral(real u, real alpha) const {
  if (u >= 0) {
    const real lo = cfg_.theta_p / 2;
    const real hi = (2 * cfg_.k_p_max + 1) * cfg_.theta_p / 2;
    return alpha * std::max(real(0), std::min(u, hi) - lo);
  }
  if (cfg_.k_n_max == 0) return 0;
  const real mag = std::abs(cfg_.theta_n);
  const real lo = mag / 2;
  const real hi = (2 * cfg_.k_n_max + 1) * mag / 2;
  return -alpha * std::max(real(0), std::min(-u, hi) - lo);
}

real SurrogateRule::grad(real u, real alpha) const {
  if (spec_.family == Family::kCfRectangular) {
    if (u < 0 && cfg_.k_n_max == 0) return 0;
    return sg_cf_rect(u, cfg_, alpha);
  }
  if (spec_.composition == Composition::kNearest) {
    real best = std::numeric_limits<real>::infinity();
    real c_best = centers_.front();
    for (real c : centers_)
      if (std::abs(u - c) < best) {
        best = std::abs(u - c);
        c_best = c;
      }
    return level_grad(u, c_best, alpha);
  }
  real g = 0;
  for (real c : centers_) g += level_grad(u, c, alpha);
  return g;
}

real SurrogateRule::smooth(real u, real alpha) const {
  if (!supports_smoothing())
    throw ConfigError(
        "smoothed forward requires surrogate.composition = sum");
  if (spec_.family == Family::kCfRectangular) return cf_rect_integral(u, alpha);
  real s = 0;
  for (real c : centers_) s += level_cdf(u, c, alpha) - level_cdf(0, c, alpha);
  return s;
}

real SurrogateRule::smooth_dalpha(real u, real alpha) const {
  if (!supports_smoothing()) return 0;
  if (spec_.family == Family::kCfRectangular)
    return cf_rect_integral(u, alpha) / alpha;
  real d = 0;
  for (real c : centers_)
    d += level_cdf_dalpha(u, c, alpha) - level_cdf_dalpha(0, c, alpha);
  return d;
}

}  // namespace cfsnn::surrogate
