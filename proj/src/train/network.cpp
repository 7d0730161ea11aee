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

#include "cfsnn/train/network.hpp"

#include <cmath>

#include "cfsnn/autodiff/ops.hpp"
#include "cfsnn/autodiff/tdbn.hpp"
#include "cfsnn/core/rng.hpp"

namespace cfsnn::train {

struct ForwardContext {
  std::size_t steps;
  std::size_t batch;
  ForwardOptions opts;
  ForwardResult* result;
};

class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;
  virtual ad::Tensor forward(const ad::Tensor& x, ForwardContext& ctx) = 0;
  virtual void parameters(std::vector<ad::Parameter*>&) {}
  virtual void buffers(std::vector<NamedBuffer>&) {}
  const std::string& name() const { return name_; }

 protected:
  std::string name_;
};

ad::Tensor voting(const ad::Tensor& s, std::size_t steps, std::size_t batch,
                  std::size_t classes) {
  if (s.shape().rank() != 2)
    throw ShapeError("voting: input must be [T*batch, neurons], got " +
                     s.shape().str());
  const std::size_t n = s.shape()[1];
  if (n % classes != 0)
    throw ShapeError("voting: " + std::to_string(n) +
                     " output neurons are not divisible into " +
                     std::to_string(classes) + " classes");
  const std::size_t g = n / classes;
  const real k = real(1) / static_cast<real>(steps * g);
  const auto sv = s.values();
  std::vector<real> o(batch * classes, real(0));
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < classes; ++c)
        for (std::size_t j = 0; j < g; ++j)
          o[b * classes + c] += sv[(t * batch + b) * n + c * g + j];
  for (auto& v : o) v *= k;
  ad::Tensor out = ad::make_output("voting", Shape{batch, classes}, std::move(o));
  if (ad::should_record({&s})) {
    ad::Node* sn = s.node();
    ad::Node* on = out.node();
    ad::record("voting", {s}, out, [=]() {
      auto& gs = sn->grad_buffer();
      for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t c = 0; c < classes; ++c)
            for (std::size_t j = 0; j < g; ++j)
              gs[(t * batch + b) * n + c * g + j] += on->grad[b * classes + c] * k;
    });
  }
  return out;
}

namespace {

void record_input(ForwardContext& ctx, const std::string& site,
                  const ad::Tensor& x) {
  auto& rec = ctx.result->synapses;
  const std::size_t id = rec.layer_index(site);
  const std::size_t per = x.numel() / ctx.steps;
  for (std::size_t t = 0; t < ctx.steps; ++t)
    rec.add(id, t, x.values().subspan(t * per, per));
}

ad::Tensor uniform_init(const Shape& shape, real bound, Rng& rng) {
  std::vector<real> v(shape.numel());
  for (auto& x : v) x = static_cast<real>(rng.uniform(-bound, bound));
  return ad::Tensor::from(shape, std::move(v), true);
}

// d alpha / d x flows only into element t of the grid.
ad::Tensor tsg_alpha_op(const ad::Tensor& x, std::size_t t, real scale,
                        real bias) {
  const real sg = surrogate::sigmoid(x.at(t));
  ad::Tensor out = ad::make_output("tsg_alpha", Shape{}, {scale * sg + bias});
  if (ad::should_record({&x})) {
    ad::Node* xn = x.node();
    ad::Node* on = out.node();
    ad::record("tsg_alpha", {x}, out, [=]() {
      xn->grad_buffer()[t] += on->grad[0] * scale * sg * (1 - sg);
    });
  }
  return out;
}

class LinearLayer : public Layer {
 public:
  LinearLayer(std::string name, std::size_t in, const LayerSpec& l, Rng rng)
      : Layer(std::move(name)) {
    const real bound = real(1) / std::sqrt(static_cast<real>(in));
    w_ = ad::Parameter(name_ + ".weight", uniform_init(Shape{l.out, in}, bound, rng));
    if (l.bias)
      b_ = ad::Parameter(name_ + ".bias", uniform_init(Shape{l.out}, bound, rng));
  }
  ad::Tensor forward(const ad::Tensor& x, ForwardContext& ctx) override {
    record_input(ctx, name_, x);
    return ad::linear(x, w_.tensor, b_.tensor);
  }
  void parameters(std::vector<ad::Parameter*>& out) override {
    out.push_back(&w_);
    if (b_.tensor.defined()) out.push_back(&b_);
  }

 private:
  ad::Parameter w_, b_;
};

class ConvLayer : public Layer {
 public:
  ConvLayer(std::string name, std::size_t cin, std::size_t cout,
            std::size_t kernel, ad::Conv2dDesc desc, bool bias, Rng rng)
      : Layer(std::move(name)), desc_(desc) {
    const real bound =
        real(1) / std::sqrt(static_cast<real>(cin * kernel * kernel));
    w_ = ad::Parameter(name_ + ".weight",
                       uniform_init(Shape{cout, cin, kernel, kernel}, bound, rng));
    if (bias)
      b_ = ad::Parameter(name_ + ".bias", uniform_init(Shape{cout}, bound, rng));
  }
  ad::Tensor forward(const ad::Tensor& x, ForwardContext& ctx) override {
    record_input(ctx, name_, x);
    return ad::conv2d(x, w_.tensor, desc_, b_.tensor);
  }
  void parameters(std::vector<ad::Parameter*>& out) override {
    out.push_back(&w_);
    if (b_.tensor.defined()) out.push_back(&b_);
  }

 private:
  ad::Conv2dDesc desc_;
  ad::Parameter w_, b_;
};

class TdbnLayer : public Layer {
 public:
  TdbnLayer(std::string name, std::size_t channels, real theta, real eps)
      : Layer(std::move(name)), theta_(theta), eps_(eps), running_(channels) {
    gamma_ = ad::Parameter(name_ + ".gamma",
                           ad::Tensor::full(Shape{channels}, 1, true));
    beta_ = ad::Parameter(name_ + ".beta",
                          ad::Tensor::full(Shape{channels}, 0, true));
  }
  ad::Tensor forward(const ad::Tensor& x, ForwardContext& ctx) override {
    return ad::tdbn_forward(x, gamma_.tensor, beta_.tensor, theta_, eps_,
                            ctx.opts.training, &running_);
  }
  void parameters(std::vector<ad::Parameter*>& out) override {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }
  void buffers(std::vector<NamedBuffer>& out) override {
    out.push_back({name_ + ".running_mean", &running_.mean});
    out.push_back({name_ + ".running_var", &running_.var});
  }

 private:
  real theta_, eps_;
  ad::BnRunningStats running_;
  ad::Parameter gamma_, beta_;
};

class PoolLayer : public Layer {
 public:
  PoolLayer(std::string name, std::size_t k, bool max)
      : Layer(std::move(name)), k_(k), max_(max) {}
  ad::Tensor forward(const ad::Tensor& x, ForwardContext&) override {
    return max_ ? ad::max_pool2d(x, k_) : ad::avg_pool2d(x, k_);
  }

 private:
  std::size_t k_;
  bool max_;
};

class FlattenLayer : public Layer {
 public:
  using Layer::Layer;
  ad::Tensor forward(const ad::Tensor& x, ForwardContext&) override {
    const std::size_t rows = x.shape()[0];
    return ad::reshape(x, Shape{rows, x.numel() / rows});
  }
};

class VotingLayer : public Layer {
 public:
  VotingLayer(std::string name, std::size_t classes)
      : Layer(std::move(name)), classes_(classes) {}
  ad::Tensor forward(const ad::Tensor& x, ForwardContext& ctx) override {
    return voting(x, ctx.steps, ctx.batch, classes_);
  }

 private:
  std::size_t classes_;
};

}  // namespace

class SpikingLayer : public Layer {
 public:
  SpikingLayer(std::string name, std::size_t index, const NeuronConfig& cfg,
               const NetworkSpec& spec)
      : Layer(std::move(name)),
        index_(index),
        cfg_(cfg),
        rule_(spec.surrogate, cfg),
        fixed_alpha_(spec.surrogate.alpha),
        tsg_(spec.tsg) {
    if (rule_.learnable()) {
      x_ = ad::Parameter(name_ + ".tsg_x",
                         ad::Tensor::full(Shape{spec.steps}, spec.tsg.init_x, true),
                         false);
      x_.is_tsg = true;
    }
  }

  ad::Tensor forward(const ad::Tensor& x, ForwardContext& ctx) override {
    const std::size_t b = ctx.batch;
    auto& res = *ctx.result;
    const std::size_t rec = res.spikes.layer_index(name_);
    std::vector<ad::Tensor> outs;
    outs.reserve(ctx.steps);
    ad::Tensor v;
    for (std::size_t t = 0; t < ctx.steps; ++t) {
      try {
        ad::Tensor current =
            ctx.steps == 1 ? x : ad::slice_rows(x, t * b, (t + 1) * b);
        SpikingStep st = spiking_step(v, current, cfg_, rule_, alpha_tensor(t),
                                      ctx.opts.mode);
        res.spikes.add(rec, t, st.s.values());
        res.membranes[index_][t] = st.u;
        res.outputs[index_][t] = st.s;
        v = st.v;
        outs.push_back(st.s);
      } catch (const NumericError& e) {
        throw NumericError(name_ + " step " + std::to_string(t) + ": " + e.what());
      }
    }
    return outs.size() == 1 ? outs[0] : ad::concat_rows(outs);
  }

  void parameters(std::vector<ad::Parameter*>& out) override {
    if (x_.tensor.defined()) out.push_back(&x_);
  }

  real alpha(std::size_t t) const {
    if (!x_.tensor.defined()) return fixed_alpha_;
    return tsg_.scale * surrogate::sigmoid(x_.tensor.at(t)) + tsg_.bias;
  }
  bool learnable() const { return x_.tensor.defined(); }
  const ad::Tensor& tsg_x() const { return x_.tensor; }
  void freeze(bool frozen) {
    if (x_.tensor.defined()) x_.tensor.set_requires_grad(!frozen);
  }

 private:
  ad::Tensor alpha_tensor(std::size_t t) const {
    if (!x_.tensor.defined()) return ad::Tensor::scalar(fixed_alpha_);
    return tsg_alpha_op(x_.tensor, t, tsg_.scale, tsg_.bias);
  }

  std::size_t index_;
  NeuronConfig cfg_;
  surrogate::SurrogateRule rule_;
  real fixed_alpha_;
  TsgInit tsg_;
  ad::Parameter x_;
};

namespace {

// conv3x3 -> tdBN -> spike -> conv3x3, plus a shortcut, summed and
// normalized. The sum is left for the following spiking layer.
class ResidualLayer : public Layer {
 public:
  ResidualLayer(std::string name, std::unique_ptr<ConvLayer> conv1,
                std::unique_ptr<TdbnLayer> bn1,
                std::unique_ptr<SpikingLayer> spike,
                std::unique_ptr<ConvLayer> conv2,
                std::unique_ptr<ConvLayer> shortcut,
                std::unique_ptr<TdbnLayer> bn2)
      : Layer(std::move(name)),
        conv1_(std::move(conv1)),
        bn1_(std::move(bn1)),
        spike_(std::move(spike)),
        conv2_(std::move(conv2)),
        shortcut_(std::move(shortcut)),
        bn2_(std::move(bn2)) {}

  ad::Tensor forward(const ad::Tensor& x, ForwardContext& ctx) override {
    ad::Tensor h = conv1_->forward(x, ctx);
    h = bn1_->forward(h, ctx);
    h = spike_->forward(h, ctx);
    h = conv2_->forward(h, ctx);
    ad::Tensor sc = shortcut_ ? shortcut_->forward(x, ctx) : x;
    return bn2_->forward(ad::add(h, sc), ctx);
  }
  void parameters(std::vector<ad::Parameter*>& out) override {
    conv1_->parameters(out);
    bn1_->parameters(out);
    spike_->parameters(out);
    conv2_->parameters(out);
    if (shortcut_) shortcut_->parameters(out);
    bn2_->parameters(out);
  }
  void buffers(std::vector<NamedBuffer>& out) override {
    bn1_->buffers(out);
    bn2_->buffers(out);
  }

 private:
  std::unique_ptr<ConvLayer> conv1_;
  std::unique_ptr<TdbnLayer> bn1_;
  std::unique_ptr<SpikingLayer> spike_;
  std::unique_ptr<ConvLayer> conv2_;
  std::unique_ptr<ConvLayer> shortcut_;
  std::unique_ptr<TdbnLayer> bn2_;
};

std::string shape_error(const std::string& layer, const char* want,
                        const Shape& got) {
  return layer + ": expects " + want + " input, got per-sample shape " + got.str();
}

}  // namespace

class Builder {
 public:
  Builder(Network& net, std::uint64_t seed) : net_(net), rng_(seed) {}

  void build() {
    Shape s = net_.sample_shape_;
    const auto& spec = net_.spec_;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      const auto& l = spec.layers[i];
      const std::string name = std::to_string(i) + "." + to_string(l.type);
      net_.layers_.push_back(make(name, l, s, i));
    }
    net_.output_shape_ = s;
  }

 private:
  void add_site(const std::string& name, std::uint64_t flops) {
    net_.sites_.push_back({name, flops, !seen_spiking_});
  }

  std::unique_ptr<ConvLayer> conv(const std::string& name, Shape& s,
                                  std::size_t cout, std::size_t k,
                                  ad::Conv2dDesc d, bool bias, std::size_t salt) {
    if (s.rank() != 3) throw ShapeError(shape_error(name, "[C, H, W]", s));
    const std::size_t ho = ad::conv_output_extent(s[1], k, d.stride, d.padding);
    const std::size_t wo = ad::conv_output_extent(s[2], k, d.stride, d.padding);
    add_site(name, static_cast<std::uint64_t>(cout) * s[0] * k * k * ho * wo);
    auto layer = std::make_unique<ConvLayer>(name, s[0], cout, k, d, bias,
                                             rng_.split(salt));
    s = Shape{cout, ho, wo};
    return layer;
  }

  std::unique_ptr<TdbnLayer> bn(const std::string& name, const Shape& s) {
    return std::make_unique<TdbnLayer>(name, s[0], net_.spec_.neuron.theta_p,
                                       net_.spec_.bn_eps);
  }

  std::unique_ptr<SpikingLayer> spiking(const std::string& name,
                                        const LayerSpec& l) {
    NeuronConfig cfg = net_.spec_.neuron;
    if (l.neuron_kind) cfg.kind = *l.neuron_kind;
    auto layer = std::make_unique<SpikingLayer>(name, net_.spiking_.size(), cfg,
                                                net_.spec_);
    net_.spiking_.push_back(layer.get());
    seen_spiking_ = true;
    return layer;
  }

  std::unique_ptr<Layer> make(const std::string& name, const LayerSpec& l,
                              Shape& s, std::size_t index) {
    const std::size_t salt = 1000 * (index + 1);
    switch (l.type) {
      case LayerType::kLinear: {
        if (s.rank() != 1)
          throw ShapeError(shape_error(name, "flat [features]", s) +
                           "; insert a flatten layer");
        add_site(name, static_cast<std::uint64_t>(s[0]) * l.out);
        auto layer = std::make_unique<LinearLayer>(name, s[0], l, rng_.split(salt));
        s = Shape{l.out};
        return layer;
      }
      case LayerType::kConv2d:
        return conv(name, s, l.out, l.kernel, {l.stride, l.padding}, l.bias, salt);
      case LayerType::kTdbn:
        return bn(name, s);
      case LayerType::kSpiking:
        return spiking(name, l);
      case LayerType::kPool: {
        if (s.rank() != 3 || s[1] % l.kernel || s[2] % l.kernel)
          throw ShapeError(shape_error(name, "[C, H, W] tiled by the window", s));
        s = Shape{s[0], s[1] / l.kernel, s[2] / l.kernel};
        return std::make_unique<PoolLayer>(name, l.kernel, l.max_pool);
      }
      case LayerType::kFlatten:
        s = Shape{s.numel()};
        return std::make_unique<FlattenLayer>(name);
      case LayerType::kResidual: {
        if (s.rank() != 3) throw ShapeError(shape_error(name, "[C, H, W]", s));
        const Shape in = s;
        auto c1 = conv(name + ".conv1", s, l.out, 3, {l.stride, 1}, false, salt + 1);
        auto b1 = bn(name + ".bn1", s);
        LayerSpec inner;
        inner.type = LayerType::kSpiking;
        auto sp = spiking(name + ".spike", inner);
        auto c2 = conv(name + ".conv2", s, l.out, 3, {1, 1}, false, salt + 2);
        std::unique_ptr<ConvLayer> sc;
        if (l.stride != 1 || in[0] != l.out) {
          Shape t = in;
          sc = conv(name + ".shortcut", t, l.out, 1, {l.stride, 0}, false, salt + 3);
          if (!(t == s))
            throw ShapeError(name + ": shortcut shape " + t.str() +
                             " does not match branch shape " + s.str());
        }
        auto b2 = bn(name + ".bn2", s);
        return std::make_unique<ResidualLayer>(name, std::move(c1), std::move(b1),
                                               std::move(sp), std::move(c2),
                                               std::move(sc), std::move(b2));
      }
      case LayerType::kVoting:
        if (s.rank() != 1)
          throw ShapeError(shape_error(name, "flat [neurons]", s));
        if (s[0] % l.classes != 0)
          throw ShapeError(name + ": " + std::to_string(s[0]) +
                           " output neurons are not divisible into " +
                           std::to_string(l.classes) + " classes");
        s = Shape{l.classes};
        return std::make_unique<VotingLayer>(name, l.classes);
    }
    throw ConfigError(name + ": unsupported layer");
  }

  Network& net_;
  Rng rng_;
  bool seen_spiking_ = false;
};

Network::Network(NetworkSpec spec, const Shape& sample_shape, std::uint64_t seed)
    : spec_(std::move(spec)), sample_shape_(sample_shape) {
  spec_.validate();
  if (sample_shape_.rank() == 0 || sample_shape_.rank() > 3)
    throw ShapeError("sample shape must have rank 1..3, got " +
                     sample_shape_.str());
  Builder(*this, seed).build();
}

Network::~Network() = default;
Network::Network(Network&&) noexcept = default;
Network& Network::operator=(Network&&) noexcept = default;

ForwardResult Network::forward(const ad::Tensor& x, std::size_t batch,
                               const ForwardOptions& opts) {
  const std::size_t steps = spec_.steps;
  if (batch == 0) throw ShapeError("forward: empty batch");
  if (x.shape().rank() == 0 || x.shape()[0] != steps * batch ||
      !(x.shape().tail() == sample_shape_))
    throw ShapeError("forward: input " + x.shape().str() + " does not match T=" +
                     std::to_string(steps) + " x batch=" + std::to_string(batch) +
                     " x " + sample_shape_.str());
  ForwardResult res;
  res.membranes.assign(spiking_.size(), std::vector<ad::Tensor>(steps));
  res.outputs.assign(spiking_.size(), std::vector<ad::Tensor>(steps));
  ForwardContext ctx{steps, batch, opts, &res};
  ad::Tensor h = x;
  for (auto& layer : layers_) {
    try {
      h = layer->forward(h, ctx);
    } catch (const NumericError& e) {
      throw NumericError("layer " + layer->name() + ": " + e.what());
    }
  }
  res.scores = h;
  res.spikes.note_batch();
  res.synapses.note_batch();
  return res;
}

std::vector<ad::Parameter*> Network::parameters() {
  std::vector<ad::Parameter*> out;
  for (auto& l : layers_) l->parameters(out);
  return out;
}

std::vector<NamedBuffer> Network::buffers() {
  std::vector<NamedBuffer> out;
  for (auto& l : layers_) l->buffers(out);
  return out;
}

void Network::zero_grad() {
  for (auto* p : parameters()) p->tensor.zero_grad();
}

void Network::freeze_tsg(bool frozen) {
  for (auto* s : spiking_) s->freeze(frozen);
}

const std::string& Network::spiking_name(std::size_t l) const {
  return spiking_.at(l)->name();
}

real Network::alpha(std::size_t t, std::size_t l) const {
  if (t >= spec_.steps || l >= spiking_.size())
    throw std::out_of_range("alpha index (t=" + std::to_string(t) +
                            ", l=" + std::to_string(l) + ") out of range");
  return spiking_[l]->alpha(t);
}

surrogate::TsgParams Network::tsg_params() const {
  surrogate::TsgParams p(spec_.steps, spiking_.size(), spec_.tsg.init_x,
                         spec_.tsg.scale, spec_.tsg.bias);
  for (std::size_t l = 0; l < spiking_.size(); ++l)
    if (spiking_[l]->learnable())
      for (std::size_t t = 0; t < spec_.steps; ++t)
        p.x[t * p.layers + l] = spiking_[l]->tsg_x().at(t);
  return p;
}

std::vector<MacSite> plan_sites(const NetworkSpec& spec, const Shape& sample_shape) {
  return Network(spec, sample_shape, 0).sites();
}

}  // namespace cfsnn::train
