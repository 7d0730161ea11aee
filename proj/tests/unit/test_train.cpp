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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "cfsnn/core/error.hpp"
#include "cfsnn/data/dataset.hpp"
#include "cfsnn/train/checkpoint.hpp"
#include "cfsnn/train/trainer.hpp"
#include "support/gen.hpp"

using namespace cfsnn;
using namespace cfsnn::train;
using cfsnn::testing::for_all;
using cfsnn::testing::Gen;
namespace fs = std::filesystem;

namespace {

LayerSpec layer(LayerType t, std::size_t out = 0) {
  LayerSpec l;
  l.type = t;
  l.out = out;
  return l;
}

NetworkSpec mlp(std::size_t steps, std::size_t classes = 2) {
  NetworkSpec s;
  s.steps = steps;
  s.layers = {layer(LayerType::kLinear, 8),  layer(LayerType::kTdbn),
              layer(LayerType::kSpiking),    layer(LayerType::kLinear, 2 * classes),
              layer(LayerType::kTdbn),       layer(LayerType::kSpiking)};
  LayerSpec v = layer(LayerType::kVoting);
  v.classes = classes;
  s.layers.push_back(v);
  return s;
}

std::map<std::string, std::vector<real>> grads_by_name(Network& net) {
  std::map<std::string, std::vector<real>> out;
  for (auto* p : net.parameters())
    out[p->name] = std::vector<real>(p->tensor.grad().begin(), p->tensor.grad().end());
  return out;
}

void backward_once(Network& net, const ad::Tensor& x, std::span<const std::size_t> labels) {
  net.zero_grad();
  ad::Tape tape;
  ad::TapeScope scope(tape);
  ForwardOptions fo;
  fo.training = true;
  tape.backward(compute_loss(net, x, labels, loss::LossConfig{}, fo).total);
}

data::Dataset gaussians(std::size_t n, std::size_t classes, std::uint64_t seed,
                        const std::string& split = "train") {
  data::SynthConfig sc;
  sc.classes = classes;
  return data::synth_dataset(sc, n, seed, split);
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("voting examples") {
  // T=2, one sample, two classes of one neuron each.
  const auto s = ad::Tensor::from(Shape{2, 2}, {1, 1, 1, 0});
  const auto o = voting(s, 2, 1, 2);
  CHECK(o.shape() == Shape{1, 2});
  CHECK(o.at(0) == 1.0);
  CHECK(o.at(1) == 0.5);
  const auto p = voting(ad::Tensor::from(Shape{1, 4}, {1, 1, 0, 0}), 1, 1, 2);
  CHECK(p.at(0) == 1.0);
  CHECK(p.at(1) == 0.0);
  CHECK_THROWS(voting(ad::Tensor::from(Shape{1, 3}, {1, 1, 0}), 1, 1, 2));
}

TEST_CASE("voting is linear in the spikes") {
  for_all(71, 50, [](Gen& g, std::size_t) {
    const std::size_t T = g.size(1, 4), B = g.size(1, 3), C = g.size(2, 4), G = g.size(1, 3);
    const auto a = g.vec(T * B * C * G, -2, 2), b = g.vec(T * B * C * G, -2, 2);
    const double k = g.uniform(-3, 3);
    std::vector<real> mix(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) mix[i] = a[i] + static_cast<real>(k) * b[i];
    const Shape sh{T * B, C * G};
    const auto oa = voting(ad::Tensor::from(sh, a), T, B, C);
    const auto ob = voting(ad::Tensor::from(sh, b), T, B, C);
    const auto om = voting(ad::Tensor::from(sh, mix), T, B, C);
    for (std::size_t i = 0; i < B * C; ++i)
      CHECK(om.at(i) == doctest::Approx(oa.at(i) + k * ob.at(i)).epsilon(1e-12));
  });
}

TEST_CASE("network description validation and json round trip") {
  auto s = mlp(4);
  CHECK_NOTHROW(s.validate());
  CHECK(s.classes() == 2);
  const auto j = to_json(s);
  CHECK(to_json(network_from_json(j)) == j);

  auto no_vote = s;
  no_vote.layers.pop_back();
  CHECK_THROWS_AS(no_vote.validate(), ConfigError);
  auto bare = s;
  bare.layers.erase(bare.layers.begin() + 1);  // spiking right after... linear is fine
  bare.layers.erase(bare.layers.begin());      // spiking first
  CHECK_THROWS_AS(bare.validate(), ConfigError);
  auto zero_t = s;
  zero_t.steps = 0;
  CHECK_THROWS_AS(zero_t.validate(), ConfigError);

  auto bad = j;
  bad["layers"][0]["widht"] = 3;
  CHECK_THROWS_WITH_AS(network_from_json(bad), doctest::Contains("widht"), ConfigError);
}

TEST_CASE("cosine schedule") {
  CHECK(cosine_lr(0, 10, 0.1) == doctest::Approx(0.1));
  CHECK(cosine_lr(5, 10, 0.1) == doctest::Approx(0.05));
  CHECK(cosine_lr(10, 10, 0.1) == doctest::Approx(0.0));
  for (std::size_t e = 1; e < 10; ++e) CHECK(cosine_lr(e, 10, 0.1) < cosine_lr(e - 1, 10, 0.1));
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  const auto ds = gaussians(40, 2, 1);
  Network net(mlp(4), Shape{2}, 3);
  std::vector<std::vector<real>> before;
  for (auto* p : net.parameters())
    before.emplace_back(p->tensor.values().begin(), p->tensor.values().end());
  Rng rng(0);
  std::vector<std::size_t> idx(8);
  for (std::size_t i = 0; i < 8; ++i) idx[i] = i;
  const auto x = data::encode_batch(ds, idx, {data::EncodeMode::kDirect, 4}, rng);
  std::vector<std::size_t> labels(ds.labels.begin(), ds.labels.begin() + 8);
  Sgd opt(TrainConfig{});
  train_step(net, x, labels, opt, 0, loss::LossConfig{});
  std::size_t i = 0;
  for (auto* p : net.parameters()) {
    CHECK(std::vector<real>(p->tensor.values().begin(), p->tensor.values().end()) == before[i]);
    ++i;
  }
}

TEST_CASE("a training step is deterministic and changes the weights") {
  const auto ds = gaussians(40, 2, 1);
  std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5};
  std::vector<std::size_t> labels;
  for (auto i : idx) labels.push_back(ds.labels[i]);
  auto run = [&] {
    Network net(mlp(4), Shape{2}, 5);
    Rng rng(0);
    const auto x = data::encode_batch(ds, idx, {data::EncodeMode::kDirect, 4}, rng);
    Sgd opt(TrainConfig{});
    const auto st = train_step(net, x, labels, opt, 0.1, loss::LossConfig{});
    std::vector<real> w;
    for (auto* p : net.parameters())
      w.insert(w.end(), p->tensor.values().begin(), p->tensor.values().end());
    return std::make_pair(st.loss, w);
  };
  const auto a = run(), b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  Network fresh(mlp(4), Shape{2}, 5);
  std::vector<real> w0;
  for (auto* p : fresh.parameters())
    w0.insert(w0.end(), p->tensor.values().begin(), p->tensor.values().end());
  CHECK(w0 != a.second);
}

TEST_CASE("without leak each step sees only its own input") {
  for (auto kind : {NeuronKind::kCf, NeuronKind::kLif}) {
    auto spec = mlp(2);
    spec.neuron.kind = kind;
    spec.neuron.k_tau = 0;
    Network net(spec, Shape{2}, 8);
    const std::vector<real> a{0.9, -1.3}, b{2.1, 0.4};
    std::vector<real> xa, xb;
    for (const auto* v : {&a, &b}) xa.insert(xa.end(), v->begin(), v->end());
    for (const auto* v : {&b, &b}) xb.insert(xb.end(), v->begin(), v->end());
    const auto ra = net.forward(ad::Tensor::from(Shape{2, 2}, xa), 1);
    const auto rb = net.forward(ad::Tensor::from(Shape{2, 2}, xb), 1);
    for (std::size_t l = 0; l < net.spiking_layers(); ++l) {
      const auto ua = ra.membranes[l][1].values(), ub = rb.membranes[l][1].values();
      CHECK(std::vector<real>(ua.begin(), ua.end()) == std::vector<real>(ub.begin(), ub.end()));
    }
  }
}

TEST_CASE("one step with frozen steepness matches a fixed-alpha surrogate bitwise") {
  const auto ds = gaussians(40, 2, 4);
  std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<std::size_t> labels;
  for (auto i : idx) labels.push_back(ds.labels[i]);
  Rng rng(0);
  const auto x = data::encode_batch(ds, idx, {data::EncodeMode::kDirect, 1}, rng);

  auto tsg_spec = mlp(1);
  tsg_spec.surrogate.family = surrogate::Family::kTsg;
  Network tsg(tsg_spec, Shape{2}, 11);
  tsg.freeze_tsg(true);

  auto plg_spec = mlp(1);
  plg_spec.surrogate.family = surrogate::Family::kPlg;
  plg_spec.surrogate.alpha = tsg.alpha(0, 0);
  Network plg(plg_spec, Shape{2}, 11);
  for (auto* p : plg.parameters())
    for (auto* q : tsg.parameters())
      if (p->name == q->name) std::copy(q->tensor.values().begin(), q->tensor.values().end(),
                                        p->tensor.mutable_values().begin());

  backward_once(tsg, x, labels);
  backward_once(plg, x, labels);
  const auto gt = grads_by_name(tsg), gp = grads_by_name(plg);
  std::size_t matched = 0;
  for (const auto& [name, g] : gp) {
    REQUIRE(gt.count(name) == 1);
    CHECK(gt.at(name) == g);
    ++matched;
  }
  CHECK(matched == gp.size());
  for (const auto& [name, g] : gt)
    if (!gp.count(name))
      for (real v : g) CHECK(v == 0);
}

TEST_CASE("non-finite input aborts the step with a diagnostic") {
  Network net(mlp(2), Shape{2}, 1);
  std::vector<real> v{0.1, std::numeric_limits<real>::quiet_NaN(), 0.2, 0.3,
                      0.1, 0.2, 0.2, 0.3};
  const std::vector<std::size_t> labels{0, 1};
  Sgd opt(TrainConfig{});
  CHECK_THROWS_AS(train_step(net, ad::Tensor::from(Shape{4, 2}, v), labels, opt, 0.1,
                             loss::LossConfig{}),
                  NumericError);
}

TEST_CASE("evaluation is deterministic and near chance when untrained") {
  const auto ds = gaussians(1000, 10, 3, "test");
  auto spec = mlp(4, 10);
  Network net(spec, Shape{2}, 2);
  EvalOptions eo;
  eo.encoder.steps = 4;
  const auto a = evaluate(net, ds, eo);
  eo.threads = 3;
  eo.batch_size = 100;
  const auto b = evaluate(net, ds, eo);
  CHECK(a.scores == b.scores);
  CHECK(a.predictions == b.predictions);
  CHECK(a.accuracy <= 0.3);
  CHECK(a.samples == 1000);
  for (double r : a.firing_rates) {
    CHECK(r >= 0);
    CHECK(r <= 2);
  }
}

TEST_CASE("checkpoint round trip preserves evaluation bitwise") {
  const fs::path dir = fs::temp_directory_path() / "cfsnn_ckpt";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto train = gaussians(64, 2, 1), test = gaussians(40, 2, 1, "test");
  Network net(mlp(4), Shape{2}, 9);
  FitOptions fo;
  fo.train.epochs = 2;
  fo.train.batch_size = 16;
  fo.encoder.steps = 4;
  fit(net, train, test, fo);
  const auto path = (dir / "a.ckpt").string();
  Rng rng(77);
  rng.next();
  save_checkpoint(path, net, 2, rng.state(), nlohmann::json{{"note", "x"}});
  const auto ck = load_checkpoint(path);
  CHECK(ck.epoch == 2);
  CHECK(ck.rng == rng.state());
  CHECK(ck.extra["note"] == "x");
  Network back = network_from_checkpoint(ck);
  EvalOptions eo;
  eo.encoder.steps = 4;
  const auto a = evaluate(net, test, eo), b = evaluate(back, test, eo);
  CHECK(a.scores == b.scores);
  CHECK(a.accuracy == b.accuracy);

  std::string raw;
  {
    std::ifstream in(path, std::ios::binary);
    raw.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& name, const std::string& bytes) {
    const auto p = (dir / name).string();
    std::ofstream(p, std::ios::binary) << bytes;
    return p;
  };
  CHECK_THROWS_AS(load_checkpoint(write("t", raw.substr(0, raw.size() - 5))), FormatError);
  auto magic = raw;
  magic[0] = 'X';
  CHECK_THROWS_AS(load_checkpoint(write("m", magic)), FormatError);
  auto version = raw;
  version[8] = 9;
  CHECK_THROWS_AS(load_checkpoint(write("v", version)), FormatError);
  CHECK_THROWS_AS(load_checkpoint((dir / "none").string()), IoError);

  Network other(mlp(4, 3), Shape{2}, 9);
  CHECK_THROWS(restore(ck, other));
}

TEST_CASE("metrics rows are reproducible") {
  const auto train = gaussians(64, 2, 1), test = gaussians(40, 2, 1, "test");
  auto once = [&] {
    Network net(mlp(4), Shape{2}, 9);
    std::ostringstream os;
    write_metrics_header(os, net);
    FitOptions fo;
    fo.train.epochs = 2;
    fo.train.batch_size = 16;
    fo.encoder.steps = 4;
    fo.metrics = &os;
    fit(net, train, test, fo);
    return os.str();
  };
  const auto a = once();
  CHECK(a == once());
  CHECK(std::count(a.begin(), a.end(), '\n') == 3);
}

}  // TEST_SUITE
