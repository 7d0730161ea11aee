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

#include "cfsnn/loss/loss.hpp"

#include <algorithm>
#include <cmath>

#include "cfsnn/autodiff/ops.hpp"

namespace cfsnn::loss {

void LossConfig::validate() const {
  if (!(lambda >= 0)) throw ConfigError("loss.lambda must be >= 0");
  if (!(epsilon > 0)) throw ConfigError("loss.epsilon must be > 0");
  if (!(term_clamp > 0)) throw ConfigError("loss.term_clamp must be > 0");
}

bool LossConfig::uses_layer(std::size_t spiking_layer) const {
  if (pnb_layers.empty()) return true;
  return std::find(pnb_layers.begin(), pnb_layers.end(), spiking_layer) !=
         pnb_layers.end();
}

namespace {

void log_softmax_row(std::span<const real> row, std::vector<real>& out) {
  const real m = *std::max_element(row.begin(), row.end());
  real z = 0;
  for (real x : row) z += std::exp(x - m);
  const real lz = m + std::log(z);
  out.resize(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j] - lz;
}

}  // namespace

real cross_entropy(std::span<const real> output, std::size_t label) {
  if (output.size() < 2)
    throw ShapeError("cross_entropy needs at least two classes");
  if (label >= output.size())
    throw ShapeError("label " + std::to_string(label) + " out of range for " +
                     std::to_string(output.size()) + " classes");
  std::vector<real> ls;
  log_softmax_row(output, ls);
  return -ls[label];
}

ad::Tensor cross_entropy(const ad::Tensor& scores,
                         std::span<const std::size_t> labels) {
  if (scores.shape().rank() != 2)
    throw ShapeError("cross_entropy: scores must be [batch, classes], got " +
                     scores.shape().str());
  const std::size_t b = scores.shape()[0], c = scores.shape()[1];
  if (labels.size() != b)
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) +
                     " labels for batch of " + std::to_string(b));
  auto probs = std::make_shared<std::vector<real>>(b * c);
  real total = 0;
  std::vector<real> ls;
  for (std::size_t i = 0; i < b; ++i) {
    const auto row = scores.values().subspan(i * c, c);
    total += cross_entropy(row, labels[i]);
    log_softmax_row(row, ls);
    for (std::size_t j = 0; j < c; ++j) (*probs)[i * c + j] = std::exp(ls[j]);
  }
  ad::Tensor out =
      ad::make_output("cross_entropy", Shape{}, {total / static_cast<real>(b)});
  if (ad::should_record({&scores})) {
    ad::Node* sn = scores.node();
    ad::Node* on = out.node();
    std::vector<std::size_t> lab(labels.begin(), labels.end());
    ad::record("cross_entropy", {scores}, out, [=]() {
      auto& g = sn->grad_buffer();
      const real up = on->grad[0] / static_cast<real>(b);
      for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < c; ++j)
          g[i * c + j] +=
              up * ((*probs)[i * c + j] - (j == lab[i] ? real(1) : real(0)));
    });
  }
  return out;
}

int pnb_region(real u, const NeuronConfig& cfg, int k_levels,
               bool include_saturated) {
  if (u == 0) return 0;
  const real width = u > 0 ? cfg.theta_p : std::abs(cfg.theta_n);
  const real k = std::ceil(std::abs(u) / width);
  int level = static_cast<int>(std::min<real>(k, static_cast<real>(k_levels + 1)));
  if (level > k_levels) {
    if (!include_saturated) return 0;
    level = k_levels;
  }
  return u > 0 ? level : -level;
}

std::vector<int> pnb_partition(std::span<const real> u, const NeuronConfig& cfg,
                               int k_levels, bool include_saturated) {
  std::vector<int> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = pnb_region(u[i], cfg, k_levels, include_saturated);
  return out;
}

namespace {

real region_center(int k, bool positive, const NeuronConfig& cfg) {
  return positive ? static_cast<real>(k) * cfg.theta_p
                  : -static_cast<real>(k) * std::abs(cfg.theta_n);
}

int balance_levels(const NeuronConfig& cfg) {
  if (cfg.k_p_max != cfg.k_n_max)
    throw ConfigError(
        "balance loss needs k_p_max == k_n_max, got " +
        std::to_string(cfg.k_p_max) + " and " + std::to_string(cfg.k_n_max));
  return cfg.k_p_max;
}

struct LevelStats {
  real num = 0;  // sum u w
  real den = 0;  // sum w
};

// Per-level weighted sums for one potential set. Index [side][k-1], side 0
// positive, 1 negative.
struct BalanceStats {
  std::vector<LevelStats> pos, neg;
};

BalanceStats collect(std::span<const real> u, const std::vector<int>& region,
                     const NeuronConfig& cfg, int K) {
  BalanceStats st{std::vector<LevelStats>(K), std::vector<LevelStats>(K)};
  for (std::size_t i = 0; i < u.size(); ++i) {
    const int r = region[i];
    if (r == 0) continue;
    const bool pos = r > 0;
    const int k = pos ? r : -r;
    const real w = std::exp(-std::abs(region_center(k, pos, cfg) - u[i]));
    auto& ls = pos ? st.pos[k - 1] : st.neg[k - 1];
    ls.num += u[i] * w;
    ls.den += w;
  }
  return st;
}

real sgn(real x) { return x > 0 ? real(1) : (x < 0 ? real(-1) : real(0)); }

struct TermGrad {
  real value;
  real d_mu_pos;  // d term / d mu+
  real d_mu_neg;  // d term / d mu-
};

TermGrad level_term(real mu_p, real mu_n, const LossConfig& lc) {
  const real eps = lc.epsilon;
  const real den = std::abs(mu_n) + eps;
  const real ratio = std::abs(mu_p) / den;
  const real l = std::log(ratio + eps);
  const real term = std::abs(l);
  if (term > lc.term_clamp) return {lc.term_clamp, 0, 0};
  const real dl = sgn(l) / (ratio + eps);
  return {term, dl * sgn(mu_p) / den,
          dl * (-std::abs(mu_p) * sgn(mu_n) / (den * den))};
}

}  // namespace

real pnb_weighted_mean(std::span<const real> members, int k, bool positive,
                       const NeuronConfig& cfg, real eps) {
  const real c = region_center(k, positive, cfg);
  real num = 0, den = 0;
  for (real u : members) {
    const real w = std::exp(-std::abs(c - u));
    num += u * w;
    den += w;
  }
  return num / (den + eps);
}

real pnb_value(std::span<const real> u, const NeuronConfig& cfg,
               const LossConfig& lc) {
  const int K = balance_levels(cfg);
  const auto region = pnb_partition(u, cfg, K, lc.include_saturated);
  const auto st = collect(u, region, cfg, K);
  real total = 0;
  for (int k = 0; k < K; ++k) {
    const real mp = st.pos[k].num / (st.pos[k].den + lc.epsilon);
    const real mn = st.neg[k].num / (st.neg[k].den + lc.epsilon);
    total += level_term(mp, mn, lc).value;
  }
  return total / static_cast<real>(K);
}

ad::Tensor pnb_loss(std::span<const ad::Tensor> potentials,
                    const NeuronConfig& cfg, const LossConfig& lc) {
  if (potentials.empty()) throw Error("pnb_loss: no potentials supplied");
  const int K = balance_levels(cfg);
  const real inv = real(1) / static_cast<real>(K * potentials.size());

  struct Saved {
    std::vector<int> region;
    BalanceStats stats;
    std::vector<TermGrad> pos_terms;  // per level
  };
  auto saved = std::make_shared<std::vector<Saved>>();
  saved->reserve(potentials.size());
  real total = 0;
  for (const auto& p : potentials) {
    Saved s;
    s.region = pnb_partition(p.values(), cfg, K, lc.include_saturated);
    s.stats = collect(p.values(), s.region, cfg, K);
    for (int k = 0; k < K; ++k) {
      const real mp = s.stats.pos[k].num / (s.stats.pos[k].den + lc.epsilon);
      const real mn = s.stats.neg[k].num / (s.stats.neg[k].den + lc.epsilon);
      s.pos_terms.push_back(level_term(mp, mn, lc));
      total += s.pos_terms.back().value;
    }
    saved->push_back(std::move(s));
  }
  ad::Tensor out = ad::make_output("pnb_loss", Shape{}, {total * inv});
  if (ad::should_record(potentials)) {
    std::vector<ad::Node*> nodes;
    for (const auto& p : potentials) nodes.push_back(p.node());
    ad::Node* on = out.node();
    const NeuronConfig c = cfg;
    const real eps = lc.epsilon;
    ad::record("pnb_loss", potentials, out, [=]() {
      const real up = on->grad[0] * inv;
      for (std::size_t pi = 0; pi < nodes.size(); ++pi) {
        ad::Node* n = nodes[pi];
        if (!n->requires_grad) continue;
        const Saved& s = (*saved)[pi];
        auto& g = n->grad_buffer();
        for (std::size_t i = 0; i < n->value.size(); ++i) {
          const int r = s.region[i];
          if (r == 0) continue;
          const bool pos = r > 0;
          const int k = pos ? r : -r;
          const LevelStats& ls = pos ? s.stats.pos[k - 1] : s.stats.neg[k - 1];
          const TermGrad& tg = s.pos_terms[k - 1];
          const real d_mu = pos ? tg.d_mu_pos : tg.d_mu_neg;
          if (d_mu == 0) continue;
          const real u = n->value[i];
          const real ctr = region_center(k, pos, c);
          const real w = std::exp(-std::abs(ctr - u));
          const real dw = -w * sgn(u - ctr);
          const real den = ls.den + eps;
          const real mu = ls.num / den;
          const real dmu_du = (w + u * dw - mu * dw) / den;
          g[i] += up * d_mu * dmu_du;
        }
      }
    });
  }
  return out;
}

ad::Tensor total_loss(const ad::Tensor& ce, const ad::Tensor& pnb,
                      const LossConfig& lc) {
  if (!pnb.defined() || lc.lambda == 0) return ce;
  return ad::add(ce, ad::scale(pnb, lc.lambda));
}

}  // namespace cfsnn::loss
