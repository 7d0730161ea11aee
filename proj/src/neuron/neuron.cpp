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

#include "cfsnn/neuron/neuron.hpp"

#include <cmath>
#include <ostream>

#include "cfsnn/autodiff/ops.hpp"
#include "cfsnn/kernels/kernels.hpp"

namespace cfsnn {

void NeuronConfig::validate() const {
  if (!(theta_p > 0))
    throw ConfigError("neuron.theta_p must be positive, got " +
                      std::to_string(theta_p));
  if (!(theta_n < 0))
    throw ConfigError("neuron.theta_n must be negative, got " +
                      std::to_string(theta_n));
  if (k_p_max < 1 || k_n_max < 1)
    throw ConfigError("neuron.k_p_max and neuron.k_n_max must be >= 1");
  if (!(k_tau >= 0 && k_tau <= 1))
    throw ConfigError("neuron.k_tau must lie in [0, 1], got " +
                      std::to_string(k_tau));
  if (kind == NeuronKind::kCf && reset_mode != ResetMode::kSoft)
    throw ConfigError("cf neurons use soft reset; set neuron.reset_mode=soft");
}

NeuronKind parse_neuron_kind(const std::string& s) {
  if (s == "lif") return NeuronKind::kLif;
  if (s == "cf") return NeuronKind::kCf;
  throw ConfigError("unknown neuron kind '" + s + "' (expected lif or cf)");
}

ResetMode parse_reset_mode(const std::string& s) {
  if (s == "hard") return ResetMode::kHard;
  if (s == "soft") return ResetMode::kSoft;
  throw ConfigError("unknown reset mode '" + s + "' (expected hard or soft)");
}

std::string to_string(NeuronKind k) { return k == NeuronKind::kLif ? "lif" : "cf"; }
std::string to_string(ResetMode m) { return m == ResetMode::kHard ? "hard" : "soft"; }

namespace {

void check_sizes(const LayerState& state, std::span<const real> in) {
  if (state.v.size() != in.size())
    throw ShapeError("input current has " + std::to_string(in.size()) +
                     " elements, layer state has " +
                     std::to_string(state.v.size()));
}

// Threshold subtracted per unit of spike under soft reset.
inline real soft_unit(real u, const NeuronConfig& cfg) {
  if (cfg.kind == NeuronKind::kLif) return cfg.theta_p;
  return u >= 0 ? cfg.theta_p : -cfg.theta_n;
}

}  // namespace

StepResult lif_step(LayerState& state, std::span<const real> input_current,
                    const NeuronConfig& cfg) {
  check_sizes(state, input_current);
  const auto& k = kernels::active();
  const std::size_t n = input_current.size();
  StepResult r{std::vector<real>(n), std::vector<real>(n)};
  k.leaky_integrate(n, cfg.k_tau, state.v.data(), input_current.data(), r.u.data());
  k.lif_fire(n, r.u.data(), cfg.theta_p, r.spikes.data());
  for (std::size_t i = 0; i < n; ++i) {
    const real u = r.u[i], s = r.spikes[i];
    state.v[i] = cfg.reset_mode == ResetMode::kHard
                     ? u * (1 - s) + s * cfg.u_reset
                     : u - s * cfg.theta_p;
  }
  ++state.step;
  return r;
}

std::vector<real> cf_fire(std::span<const real> u, const NeuronConfig& cfg) {
  std::vector<real> s(u.size());
  kernels::active().cf_fire(u.size(), u.data(), cfg.theta_p, cfg.theta_n,
                            cfg.k_p_max, cfg.k_n_max, s.data());
  return s;
}

std::vector<real> cf_reset(std::span<const real> u, std::span<const real> spikes,
                           const NeuronConfig& cfg) {
  if (u.size() != spikes.size())
    throw ShapeError("cf_reset: " + std::to_string(u.size()) + " potentials vs " +
                     std::to_string(spikes.size()) + " spikes");
  std::vector<real> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const real s = spikes[i];
    if (s > cfg.k_p_max || s < -cfg.k_n_max)
      throw ShapeError("cf_reset: spike count " + std::to_string(s) +
                       " at element " + std::to_string(i) + " outside [-" +
                       std::to_string(cfg.k_n_max) + ", " +
                       std::to_string(cfg.k_p_max) + "]");
    if (u[i] > cfg.theta_p)
      v[i] = u[i] - s * cfg.theta_p;
    else if (u[i] < cfg.theta_n)
      v[i] = u[i] + s * cfg.theta_n;
    else
      v[i] = u[i];
  }
  return v;
}

StepResult cf_step(LayerState& state, std::span<const real> input_current,
                   const NeuronConfig& cfg) {
  check_sizes(state, input_current);
  const std::size_t n = input_current.size();
  StepResult r{std::vector<real>(n), {}};
  kernels::active().leaky_integrate(n, cfg.k_tau, state.v.data(),
                                    input_current.data(), r.u.data());
  r.spikes = cf_fire(r.u, cfg);
  state.v = cf_reset(r.u, r.spikes, cfg);
  ++state.step;
  return r;
}

StepResult neuron_step(LayerState& state, std::span<const real> input_current,
                       const NeuronConfig& cfg) {
  return cfg.kind == NeuronKind::kLif ? lif_step(state, input_current, cfg)
                                      : cf_step(state, input_current, cfg);
}

// --- SpikeRecord ---

std::size_t SpikeRecord::layer_index(const std::string& name) {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  names_.push_back(name);
  cells_.emplace_back();
  return names_.size() - 1;
}

void SpikeRecord::add(std::size_t layer, std::size_t step,
                      std::span<const real> spikes) {
  auto& row = cells_.at(layer);
  if (row.size() <= step) row.resize(step + 1);
  Cell& c = row[step];
  c.magnitude += kernels::active().abs_sum(spikes.size(), spikes.data());
  for (real s : spikes)
    if (s != 0) c.nonzero += 1;
  c.elements += static_cast<double>(spikes.size());
}

void SpikeRecord::merge(const SpikeRecord& other) {
  for (std::size_t l = 0; l < other.names_.size(); ++l) {
    const std::size_t me = layer_index(other.names_[l]);
    auto& row = cells_[me];
    const auto& src = other.cells_[l];
    if (row.size() < src.size()) row.resize(src.size());
    for (std::size_t t = 0; t < src.size(); ++t) {
      row[t].magnitude += src[t].magnitude;
      row[t].nonzero += src[t].nonzero;
      row[t].elements += src[t].elements;
    }
  }
  batches_ += other.batches_;
}

bool SpikeRecord::empty() const {
  for (const auto& row : cells_)
    for (const auto& c : row)
      if (c.elements > 0) return false;
  return true;
}

double SpikeRecord::firing_rate(std::size_t layer, CountMode mode) const {
  double num = 0, den = 0;
  for (const auto& c : cells_.at(layer)) {
    num += mode == CountMode::kMagnitude ? c.magnitude : c.nonzero;
    den += c.elements;
  }
  if (den == 0)
    throw Error("firing rate requested for layer '" + names_[layer] +
                "' with no recorded spikes");
  return num / den;
}

SpikeRecord::CountMode parse_count_mode(const std::string& s) {
  if (s == "magnitude") return SpikeRecord::CountMode::kMagnitude;
  if (s == "nonzero") return SpikeRecord::CountMode::kNonzero;
  throw ConfigError("unknown energy.count_mode '" + s +
                    "' (expected magnitude or nonzero)");
}

// --- histograms ---

std::size_t BinSpec::bins() const {
  if (!(hi > lo) || !(width > 0))
    throw ConfigError("histogram bins need hi > lo and width > 0");
  return static_cast<std::size_t>(std::ceil((hi - lo) / width - 1e-9));
}

double no_reset_variance(std::size_t t, double k_tau, double theta) {
  double v = 0, p = 1;
  for (std::size_t i = 0; i < t; ++i) {
    v += p;
    p *= k_tau * k_tau;
  }
  return v * theta * theta;
}

double literal_variance(std::size_t t, double k_tau, double theta) {
  return (1 + static_cast<double>(t > 0 ? t - 1 : 0) * k_tau * k_tau) * theta * theta;
}

MembraneHistogram membrane_histogram(
    const std::vector<std::vector<std::vector<real>>>& samples,
    const BinSpec& bins, double k_tau, double theta) {
  const std::size_t nb = bins.bins();
  MembraneHistogram h;
  bool any = false;
  for (std::size_t l = 0; l < samples.size(); ++l) {
    for (std::size_t t = 0; t < samples[l].size(); ++t) {
      const auto& xs = samples[l][t];
      if (xs.empty()) continue;
      any = true;
      std::vector<std::size_t> counts(nb, 0);
      std::size_t outside = 0;
      double sum = 0;
      for (real x : xs) {
        sum += x;
        if (x < bins.lo || x > bins.hi) {
          ++outside;
          continue;
        }
        auto b = static_cast<std::size_t>((x - bins.lo) / bins.width);
        counts[std::min(b, nb - 1)]++;
      }
      const double mean = sum / static_cast<double>(xs.size());
      double sq = 0;
      for (real x : xs) sq += (x - mean) * (x - mean);
      for (std::size_t b = 0; b < nb; ++b) {
        const real left = bins.lo + static_cast<real>(b) * bins.width;
        h.rows.push_back({l, t, left, std::min(bins.hi, left + bins.width),
                          counts[b]});
      }
      h.summaries.push_back({l, t, xs.size(), outside, mean,
                             sq / static_cast<double>(xs.size()),
                             no_reset_variance(t + 1, k_tau, theta),
                             literal_variance(t + 1, k_tau, theta)});
    }
  }
  if (!any) throw Error("membrane_histogram: no samples recorded");
  return h;
}

void MembraneHistogram::write_csv(std::ostream& os) const {
  os << "layer,step,bin_left,bin_right,count,mean,variance,oracle_variance,"
        "literal_variance\n";
  os.precision(10);
  for (const auto& r : rows)
    os << r.layer << ',' << r.step << ',' << r.left << ',' << r.right << ','
       << r.count << ",,,,\n";
  for (const auto& s : summaries)
    os << s.layer << ',' << s.step << ",summary,," << s.samples << ','
       << s.mean << ',' << s.variance << ',' << s.oracle_variance << ','
       << s.literal_variance << '\n';
}

// --- differentiable step ---

namespace {

ad::Tensor integrate(const ad::Tensor& v_prev, const ad::Tensor& current,
                     real k_tau) {
  if (!v_prev.defined()) return current;
  if (!(v_prev.shape() == current.shape()))
    throw ShapeError("membrane " + v_prev.shape().str() + " vs input current " +
                     current.shape().str());
  const std::size_t n = current.numel();
  std::vector<real> u(n);
  kernels::active().leaky_integrate(n, k_tau, v_prev.values().data(),
                                    current.values().data(), u.data());
  ad::Tensor out = ad::make_output("integrate", current.shape(), std::move(u));
  if (ad::should_record({&v_prev, &current})) {
    ad::Node* vn = v_prev.node();
    ad::Node* in = current.node();
    ad::Node* on = out.node();
    ad::record("integrate", {v_prev, current}, out, [=]() {
      ad::accumulate(in, on->grad);
      if (vn->requires_grad)
        kernels::active().axpy(n, k_tau, on->grad.data(),
                               vn->grad_buffer().data());
    });
  }
  return out;
}

ad::Tensor reset(const ad::Tensor& u, const ad::Tensor& s,
                 const NeuronConfig& cfg) {
  const std::size_t n = u.numel();
  const auto uv = u.values(), sv = s.values();
  std::vector<real> v(n);
  const bool hard = cfg.reset_mode == ResetMode::kHard;
  for (std::size_t i = 0; i < n; ++i)
    v[i] = hard ? uv[i] * (1 - sv[i]) + sv[i] * cfg.u_reset
                : uv[i] - sv[i] * soft_unit(uv[i], cfg);
  ad::Tensor out = ad::make_output("reset", u.shape(), std::move(v));
  if (ad::should_record({&u, &s})) {
    ad::Node* un = u.node();
    ad::Node* sn = s.node();
    ad::Node* on = out.node();
    ad::record("reset", {u, s}, out, [=]() {
      const auto& g = on->grad;
      if (un->requires_grad) {
        auto& gu = un->grad_buffer();
        for (std::size_t i = 0; i < n; ++i)
          gu[i] += hard ? g[i] * (1 - sn->value[i]) : g[i];
      }
      if (sn->requires_grad) {
        auto& gs = sn->grad_buffer();
        for (std::size_t i = 0; i < n; ++i)
          gs[i] += hard ? g[i] * (cfg.u_reset - un->value[i])
                        : -g[i] * soft_unit(un->value[i], cfg);
      }
    });
  }
  return out;
}

}  // namespace

SpikingStep spiking_step(const ad::Tensor& v_prev, const ad::Tensor& current,
                         const NeuronConfig& cfg,
                         const surrogate::SurrogateRule& rule,
                         const ad::Tensor& alpha, FireMode mode) {
  SpikingStep out;
  out.u = integrate(v_prev, current, cfg.k_tau);

  const auto* r = &rule;
  auto bwd = [r](real u, real a) { return r->grad(u, a); };
  auto bwd_alpha = [r](real u, real a) { return r->smooth_dalpha(u, a); };

  if (mode == FireMode::kSmoothed) {
    out.s = ad::custom_activation(
        "spike_smoothed", out.u, [r](real u, real a) { return r->smooth(u, a); },
        bwd, bwd_alpha, alpha);
  } else if (cfg.kind == NeuronKind::kLif) {
    const real theta = cfg.theta_p;
    out.s = ad::custom_activation(
        "spike_lif", out.u,
        [theta](real u, real) { return u >= theta ? real(1) : real(0); }, bwd,
        bwd_alpha, alpha);
  } else {
    const NeuronConfig c = cfg;
    out.s = ad::custom_activation(
        "spike_cf", out.u,
        [c](real u, real) {
          int count = 0;
          for (int k = 1; k <= c.k_p_max; ++k)
            if (u > k * c.theta_p) ++count;
          for (int k = 1; k <= c.k_n_max; ++k)
            if (u < k * c.theta_n) --count;
          return static_cast<real>(count);
        },
        bwd, bwd_alpha, alpha);
  }
  out.v = reset(out.u, out.s, cfg);
  return out;
}

}  // namespace cfsnn
