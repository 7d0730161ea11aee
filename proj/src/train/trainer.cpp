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

#include "cfsnn/train/trainer.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <thread>

#include "cfsnn/kernels/kernels.hpp"

namespace cfsnn::train {

real cosine_lr(std::size_t epoch, std::size_t total_epochs, real eta0) {
  if (total_epochs == 0) throw ConfigError("cosine_lr: total_epochs must be >= 1");
  if (epoch > total_epochs)
    throw std::out_of_range("cosine_lr: epoch " + std::to_string(epoch) +
                            " beyond " + std::to_string(total_epochs));
  if (epoch == total_epochs) return 0;
  const double phase = std::numbers::pi * static_cast<double>(epoch) /
                       static_cast<double>(total_epochs);
  return static_cast<real>(eta0 * (1 + std::cos(phase)) / 2);
}

void Sgd::step(std::span<ad::Parameter* const> params, real lr) const {
  for (ad::Parameter* p : params) {
    if (!p->tensor.requires_grad()) continue;
    const real step = p->is_tsg && cfg_.tsg_lr ? *cfg_.tsg_lr : lr;
    const real wd = p->weight_decay ? cfg_.weight_decay : real(0);
    const auto g = p->tensor.grad();
    auto w = p->tensor.mutable_values();
    auto& m = p->momentum;
    if (m.size() != w.size()) m.assign(w.size(), real(0));
    for (std::size_t i = 0; i < w.size(); ++i) {
      const real d = (g.empty() ? real(0) : g[i]) + wd * w[i];
      m[i] = cfg_.momentum * m[i] + d;
      w[i] -= step * m[i];
    }
  }
}

LossParts compute_loss(Network& net, const ad::Tensor& x,
                       std::span<const std::size_t> labels,
                       const loss::LossConfig& lc, const ForwardOptions& opts) {
  LossParts parts;
  parts.forward = net.forward(x, labels.size(), opts);
  parts.ce = loss::cross_entropy(parts.forward.scores, labels);
  if (lc.lambda > 0) {
    for (auto l : lc.pnb_layers)
      if (l >= net.spiking_layers())
        throw ConfigError("loss.pnb_layers names spiking layer " +
                          std::to_string(l) + " but the network has " +
                          std::to_string(net.spiking_layers()));
    std::vector<ad::Tensor> us;
    for (std::size_t l = 0; l < net.spiking_layers(); ++l)
      if (lc.uses_layer(l))
        for (const auto& u : parts.forward.membranes[l]) us.push_back(u);
    if (!us.empty()) parts.pnb = loss::pnb_loss(us, net.spec().neuron, lc);
  }
  parts.total = loss::total_loss(parts.ce, parts.pnb, lc);
  return parts;
}

StepStats train_step(Network& net, const ad::Tensor& x,
                     std::span<const std::size_t> labels, const Sgd& opt,
                     real lr, const loss::LossConfig& lc, FireMode mode) {
  net.zero_grad();
  ad::Tape tape;
  ad::TapeScope scope(tape);
  LossParts parts = compute_loss(net, x, labels, lc, {true, mode});
  StepStats st;
  st.loss = parts.total.item();
  st.ce = parts.ce.item();
  st.pnb = parts.pnb.defined() ? parts.pnb.item() : real(0);
  if (!std::isfinite(st.loss))
    throw NumericError("non-finite loss (ce " + std::to_string(st.ce) +
                       ", balance " + std::to_string(st.pnb) + ")");
  ad::backward(parts.total);
  auto params = net.parameters();
  for (const auto* p : params) {
    const auto g = p->tensor.grad();
    if (!g.empty() && !kernels::active().all_finite(g.size(), g.data()))
      throw NumericError("non-finite gradient in parameter " + p->name);
  }
  opt.step(params, lr);
  return st;
}

namespace {

struct BatchOut {
  std::size_t correct = 0;
  double loss = 0;
  std::vector<std::size_t> preds;
  std::vector<real> scores;
  SpikeRecord spikes, synapses;
  std::vector<std::vector<std::vector<real>>> membranes;  // [l][t]
  std::vector<std::vector<real>> spike_values;           // [l]
};

BatchOut eval_batch(Network& net, const data::Dataset& ds, std::size_t begin,
                    std::size_t end, const EvalOptions& opts, std::size_t index) {
  ad::NoGradScope no_grad;
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  Rng rng = Rng(opts.seed).split(index);
  const ad::Tensor x = data::encode_batch(ds, idx, opts.encoder, rng);
  ForwardResult res = net.forward(x, idx.size(), {false, FireMode::kSpike});
  BatchOut out;
  const std::size_t c = ds.classes;
  const auto sv = res.scores.values();
  if (res.scores.shape()[1] != c)
    throw ShapeError("network emits " + std::to_string(res.scores.shape()[1]) +
                     " classes, dataset has " + std::to_string(c));
  out.scores.assign(sv.begin(), sv.end());
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const auto row = sv.subspan(b * c, c);
    const std::size_t pred = static_cast<std::size_t>(
        std::max_element(row.begin(), row.end()) - row.begin());
    out.preds.push_back(pred);
    if (pred == ds.labels[idx[b]]) ++out.correct;
    out.loss += loss::cross_entropy(row, ds.labels[idx[b]]);
  }
  out.spikes = std::move(res.spikes);
  out.synapses = std::move(res.synapses);
  if (opts.capture_membranes) {
    out.membranes.resize(res.membranes.size());
    for (std::size_t l = 0; l < res.membranes.size(); ++l)
      for (const auto& u : res.membranes[l])
        out.membranes[l].emplace_back(u.values().begin(), u.values().end());
  }
  if (opts.capture_spikes) {
    out.spike_values.resize(res.outputs.size());
    for (std::size_t l = 0; l < res.outputs.size(); ++l)
      for (const auto& s : res.outputs[l])
        out.spike_values[l].insert(out.spike_values[l].end(), s.values().begin(),
                                   s.values().end());
  }
  return out;
}

}  // namespace

EvalMetrics evaluate(Network& net, const data::Dataset& ds, const EvalOptions& opts) {
  if (ds.size() == 0) throw Error("evaluate: empty dataset");
  if (opts.batch_size == 0) throw ConfigError("evaluate: batch size must be >= 1");
  const std::size_t n = ds.size(), bs = opts.batch_size;
  const std::size_t batches = (n + bs - 1) / bs;
  std::vector<BatchOut> outs(batches);

  const std::size_t threads = std::max<std::size_t>(1, std::min(opts.threads, batches));
  if (threads == 1) {
    for (std::size_t b = 0; b < batches; ++b)
      outs[b] = eval_batch(net, ds, b * bs, std::min(n, (b + 1) * bs), opts, b);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&, w]() {
        try {
          for (std::size_t b = w; b < batches; b += threads)
            outs[b] = eval_batch(net, ds, b * bs, std::min(n, (b + 1) * bs), opts, b);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  EvalMetrics m;
  m.samples = n;
  std::size_t correct = 0;
  double loss = 0;
  for (auto& o : outs) {
    correct += o.correct;
    loss += o.loss;
    m.predictions.insert(m.predictions.end(), o.preds.begin(), o.preds.end());
    m.scores.insert(m.scores.end(), o.scores.begin(), o.scores.end());
    m.spikes.merge(o.spikes);
    m.synapses.merge(o.synapses);
    if (opts.capture_membranes) {
      m.membranes.resize(o.membranes.size());
      for (std::size_t l = 0; l < o.membranes.size(); ++l) {
        m.membranes[l].resize(o.membranes[l].size());
        for (std::size_t t = 0; t < o.membranes[l].size(); ++t)
          m.membranes[l][t].insert(m.membranes[l][t].end(),
                                   o.membranes[l][t].begin(),
                                   o.membranes[l][t].end());
      }
    }
    if (opts.capture_spikes) {
      m.spike_values.resize(o.spike_values.size());
      for (std::size_t l = 0; l < o.spike_values.size(); ++l)
        m.spike_values[l].insert(m.spike_values[l].end(),
                                 o.spike_values[l].begin(), o.spike_values[l].end());
    }
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  m.mean_loss = loss / static_cast<double>(n);
  for (std::size_t l = 0; l < net.spiking_layers(); ++l)
    for (std::size_t i = 0; i < m.spikes.layers(); ++i)
      if (m.spikes.name(i) == net.spiking_name(l))
        m.firing_rates.push_back(m.spikes.firing_rate(i));
  return m;
}

void write_metrics_header(std::ostream& os, const Network& net) {
  os << "epoch,lr,train_loss,train_ce,train_pnb,test_acc,mean_firing_rate";
  for (std::size_t l = 0; l < net.spiking_layers(); ++l)
    for (std::size_t t = 0; t < net.spec().steps; ++t)
      os << ",alpha_l" << l << "_t" << t;
  os << '\n';
}

void write_metrics_row(std::ostream& os, const EpochRow& row) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  os << row.epoch << ',' << num(row.lr) << ',' << num(row.train_loss) << ','
     << num(row.train_ce) << ',' << num(row.train_pnb) << ','
     << num(row.test_acc) << ',' << num(row.mean_firing_rate);
  for (real a : row.alphas) os << ',' << num(a);
  os << '\n';
  os.flush();
}

std::vector<EpochRow> fit(Network& net, const data::Dataset& train_set,
                          const data::Dataset& test_set, const FitOptions& opts,
                          std::size_t first_epoch) {
  const TrainConfig& tc = opts.train;
  tc.validate();
  opts.loss.validate();
  if (train_set.size() == 0) throw Error("fit: empty training set");
  const Shape step = data::step_shape(train_set, opts.encoder);
  if (!(step == net.sample_shape()))
    throw ShapeError("training samples " + step.str() +
                     " do not match the network input " + net.sample_shape().str());
  if (opts.encoder.steps != net.spec().steps)
    throw ConfigError("encoder T=" + std::to_string(opts.encoder.steps) +
                      " differs from network T=" + std::to_string(net.spec().steps));
  if (tc.freeze_tsg) net.freeze_tsg(true);
  const Sgd opt(tc);
  const Rng base(opts.seed);

  std::vector<EpochRow> rows;
  for (std::size_t e = first_epoch; e < tc.epochs; ++e) {
    const real lr = tc.schedule == Schedule::kCosine ? cosine_lr(e, tc.epochs, tc.lr)
                                                     : tc.lr;
    Rng rng = base.split(1000 + e);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));

    double loss = 0, ce = 0, pnb = 0;
    std::size_t seen = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += tc.batch_size) {
      const std::size_t b1 = std::min(order.size(), b0 + tc.batch_size);
      if (b1 - b0 < 2) break;  // batch statistics need two samples
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(b0),
                                   order.begin() + static_cast<std::ptrdiff_t>(b1));
      std::vector<std::size_t> labels;
      for (auto i : idx) labels.push_back(train_set.labels[i]);
      ad::Tensor x;
      if (opts.augment) {
        data::Dataset mini;
        mini.sample_shape = train_set.sample_shape;
        mini.classes = train_set.classes;
        mini.temporal = train_set.temporal;
        for (auto i : idx) {
          auto s = train_set.sample(i);
          std::vector<real> copy(s.begin(), s.end());
          data::augment_flip_crop(copy, train_set.sample_shape, 2, rng);
          mini.features.insert(mini.features.end(), copy.begin(), copy.end());
          mini.labels.push_back(train_set.labels[i]);
        }
        std::vector<std::size_t> local(idx.size());
        std::iota(local.begin(), local.end(), 0);
        x = data::encode_batch(mini, local, opts.encoder, rng);
      } else {
        x = data::encode_batch(train_set, idx, opts.encoder, rng);
      }
      const StepStats st = train_step(net, x, labels, opt, lr, opts.loss, opts.mode);
      const double w = static_cast<double>(idx.size());
      loss += st.loss * w;
      ce += st.ce * w;
      pnb += st.pnb * w;
      seen += idx.size();
    }

    EpochRow row;
    row.epoch = e + 1;
    row.lr = lr;
    if (seen) {
      row.train_loss = loss / static_cast<double>(seen);
      row.train_ce = ce / static_cast<double>(seen);
      row.train_pnb = pnb / static_cast<double>(seen);
    }
    if (test_set.size()) {
      EvalOptions eo;
      eo.encoder = opts.encoder;
      eo.seed = opts.seed ^ 0x7e57ULL;
      eo.threads = opts.eval_threads;
      const EvalMetrics m = evaluate(net, test_set, eo);
      row.test_acc = m.accuracy;
      double fr = 0;
      for (double r : m.firing_rates) fr += r;
      if (!m.firing_rates.empty()) row.mean_firing_rate = fr / m.firing_rates.size();
    }
    for (std::size_t l = 0; l < net.spiking_layers(); ++l)
      for (std::size_t t = 0; t < net.spec().steps; ++t)
        row.alphas.push_back(net.alpha(t, l));
    if (opts.metrics) write_metrics_row(*opts.metrics, row);
    if (opts.on_epoch) opts.on_epoch(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cfsnn::train
