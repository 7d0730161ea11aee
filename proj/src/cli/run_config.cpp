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

#include "cfsnn/cli/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfsnn/core/json_config.hpp"

namespace cfsnn::cli {

using nlohmann::json;
using config::check_keys;
using config::get;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty part");
    if (!node->is_object()) {
      if (!node->is_null())
        throw ConfigError("override '" + key + "': '" + part +
                          "' is inside a value that is not an object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

namespace {

void parse_data(const json& j, DataConfig& d, std::size_t steps) {
  const std::string p = "data";
  check_keys(j, p, {"kind", "n_train", "n_test", "classes", "dims", "separation",
                    "noise", "train_images", "train_labels", "test_images",
                    "test_labels", "train_csv", "test_csv", "augment"});
  d.kind = get<std::string>(j, p, "kind", d.kind);
  if (d.kind != "idx" && d.kind != "csv") d.synth.kind = data::parse_synth_kind(d.kind);
  d.n_train = get<std::size_t>(j, p, "n_train", d.n_train);
  d.n_test = get<std::size_t>(j, p, "n_test", d.n_test);
  d.synth.classes = get<std::size_t>(j, p, "classes", d.synthetic() ? 2 : 10);
  d.classes = d.synth.classes;
  d.synth.dims = get<std::size_t>(j, p, "dims", d.synth.dims);
  d.synth.separation = get<real>(j, p, "separation", d.synth.separation);
  d.synth.noise = get<real>(j, p, "noise", d.synth.noise);
  d.synth.steps = steps;
  d.train_images = get<std::string>(j, p, "train_images", "");
  d.train_labels = get<std::string>(j, p, "train_labels", "");
  d.test_images = get<std::string>(j, p, "test_images", "");
  d.test_labels = get<std::string>(j, p, "test_labels", "");
  d.train_csv = get<std::string>(j, p, "train_csv", "");
  d.test_csv = get<std::string>(j, p, "test_csv", "");
  d.augment = get<bool>(j, p, "augment", false);
  if (d.kind == "idx" && (d.train_images.empty() || d.train_labels.empty() ||
                          d.test_images.empty() || d.test_labels.empty()))
    throw ConfigError("data: kind idx needs train_images, train_labels, "
                      "test_images and test_labels");
  if (d.kind == "csv" && (d.train_csv.empty() || d.test_csv.empty()))
    throw ConfigError("data: kind csv needs train_csv and test_csv");
  if (d.classes < 2) throw ConfigError("data.classes must be >= 2");
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  config::require_object(j, "");
  check_keys(j, "", {"seed", "network", "neuron", "surrogate", "loss", "train", "data",
                     "encoder", "noise", "eval", "energy", "gradcheck", "inspect",
                     "output"});
  RunConfig c;
  c.seed = get<std::uint64_t>(j, "", "seed", 0);

  json net = j.value("network", json::object());
  config::require_object(net, "network");
  check_keys(net, "network", {"T", "bn_eps", "layers"});
  if (j.contains("neuron")) net["neuron"] = j["neuron"];
  if (j.contains("surrogate")) net["surrogate"] = j["surrogate"];
  c.network = train::network_from_json(net);
  c.default_layers = c.network.layers.empty();
  c.network.neuron.validate();
  c.network.surrogate.validate();
  if (c.network.steps == 0) throw ConfigError("network.T must be >= 1");

  if (j.contains("loss")) {
    const json& l = j["loss"];
    const std::string p = "loss";
    check_keys(l, p, {"lambda", "epsilon", "term_clamp", "pnb_layers", "include_saturated"});
    c.loss.lambda = get<real>(l, p, "lambda", c.loss.lambda);
    c.loss.epsilon = get<real>(l, p, "epsilon", c.loss.epsilon);
    c.loss.term_clamp = get<real>(l, p, "term_clamp", c.loss.term_clamp);
    c.loss.include_saturated = get<bool>(l, p, "include_saturated", c.loss.include_saturated);
    if (l.contains("pnb_layers")) {
      if (!l["pnb_layers"].is_array())
        throw ConfigError("loss.pnb_layers: expected an array of layer indices");
      for (const auto& v : l["pnb_layers"]) {
        if (!v.is_number_unsigned())
          throw ConfigError("loss.pnb_layers: expected non-negative integers, got " + v.dump());
        c.loss.pnb_layers.push_back(v.get<std::size_t>());
      }
    }
  }
  c.loss.validate();
  if (c.loss.lambda != 0 && c.network.neuron.k_p_max != c.network.neuron.k_n_max)
    throw ConfigError("loss.lambda: the balance term needs neuron.k_p_max == neuron.k_n_max");

  if (j.contains("train")) c.train = train::train_from_json(j["train"], "train");
  c.train.validate();

  parse_data(j.value("data", json::object()), c.data, c.network.steps);

  c.encoder.steps = c.network.steps;
  c.encoder.mode = c.data.kind == "temporal_xor" ? data::EncodeMode::kSequence
                                                 : data::EncodeMode::kDirect;
  if (j.contains("encoder")) {
    check_keys(j["encoder"], "encoder", {"mode"});
    if (j["encoder"].contains("mode"))
      c.encoder.mode = data::parse_encode_mode(get<std::string>(j["encoder"], "encoder", "mode", ""));
  }

  if (j.contains("noise")) {
    if (!j["noise"].is_string())
      throw ConfigError("noise: expected a string like \"uniform:0.1\" or \"none\"");
    c.noise = data::NoiseSpec::parse(j["noise"].get<std::string>());
  }

  if (j.contains("eval")) {
    check_keys(j["eval"], "eval", {"batch_size", "threads"});
    c.eval.batch_size = get<std::size_t>(j["eval"], "eval", "batch_size", c.eval.batch_size);
    c.eval.threads = get<std::size_t>(j["eval"], "eval", "threads", c.eval.threads);
    if (c.eval.batch_size == 0 || c.eval.threads == 0)
      throw ConfigError("eval.batch_size and eval.threads must be >= 1");
  }

  if (j.contains("energy")) {
    const json& e = j["energy"];
    check_keys(e, "energy", {"count_mode", "first_layer"});
    if (e.contains("count_mode"))
      c.energy.count_mode = parse_count_mode(get<std::string>(e, "energy", "count_mode", ""));
    if (e.contains("first_layer"))
      c.energy.first_layer =
          energy::parse_first_layer(get<std::string>(e, "energy", "first_layer", ""));
  }

  if (j.contains("gradcheck")) {
    const json& g = j["gradcheck"];
    const std::string p = "gradcheck";
    check_keys(g, p, {"h", "floor", "ops_tol", "loss_tol", "e2e_tol", "batch", "max_params"});
    auto& o = c.gradcheck.options;
    o.h = get<double>(g, p, "h", o.h);
    o.floor = get<double>(g, p, "floor", o.floor);
    o.ops_tol = get<double>(g, p, "ops_tol", o.ops_tol);
    o.loss_tol = get<double>(g, p, "loss_tol", o.loss_tol);
    o.e2e_tol = get<double>(g, p, "e2e_tol", o.e2e_tol);
    c.gradcheck.batch = get<std::size_t>(g, p, "batch", c.gradcheck.batch);
    c.gradcheck.max_params = get<std::size_t>(g, p, "max_params", c.gradcheck.max_params);
    if (!(o.h > 0)) throw ConfigError("gradcheck.h must be > 0");
    if (c.gradcheck.batch < 2) throw ConfigError("gradcheck.batch must be >= 2");
  }
  c.gradcheck.options.seed = c.seed;

  if (j.contains("inspect")) {
    const json& i = j["inspect"];
    check_keys(i, "inspect", {"samples", "lo", "hi", "width"});
    c.inspect.samples = get<std::size_t>(i, "inspect", "samples", c.inspect.samples);
    c.inspect.bins.lo = get<real>(i, "inspect", "lo", c.inspect.bins.lo);
    c.inspect.bins.hi = get<real>(i, "inspect", "hi", c.inspect.bins.hi);
    c.inspect.bins.width = get<real>(i, "inspect", "width", c.inspect.bins.width);
    if (!(c.inspect.bins.hi > c.inspect.bins.lo) || !(c.inspect.bins.width > 0))
      throw ConfigError("inspect: need lo < hi and width > 0");
  }

  if (j.contains("output")) {
    check_keys(j["output"], "output", {"dir"});
    c.out_dir = get<std::string>(j["output"], "output", "dir", c.out_dir);
  }
  if (c.out_dir.empty()) throw ConfigError("output.dir must not be empty");
  return c;
}

json to_json(const RunConfig& c) {
  json net = train::to_json(c.network);
  json j;
  j["seed"] = c.seed;
  j["neuron"] = net["neuron"];
  j["surrogate"] = net["surrogate"];
  net.erase("neuron");
  net.erase("surrogate");
  j["network"] = net;
  json pl = json::array();
  for (auto l : c.loss.pnb_layers) pl.push_back(l);
  j["loss"] = {{"lambda", c.loss.lambda},
               {"epsilon", c.loss.epsilon},
               {"term_clamp", c.loss.term_clamp},
               {"pnb_layers", pl},
               {"include_saturated", c.loss.include_saturated}};
  j["train"] = train::to_json(c.train);
  json d = {{"kind", c.data.kind}, {"classes", c.data.classes}, {"augment", c.data.augment}};
  if (c.data.synthetic()) {
    d["n_train"] = c.data.n_train;
    d["n_test"] = c.data.n_test;
    d["dims"] = c.data.synth.dims;
    d["separation"] = c.data.synth.separation;
    d["noise"] = c.data.synth.noise;
  } else if (c.data.kind == "idx") {
    d["train_images"] = c.data.train_images;
    d["train_labels"] = c.data.train_labels;
    d["test_images"] = c.data.test_images;
    d["test_labels"] = c.data.test_labels;
  } else {
    d["train_csv"] = c.data.train_csv;
    d["test_csv"] = c.data.test_csv;
  }
  j["data"] = d;
  j["encoder"] = {{"mode", data::to_string(c.encoder.mode)}};
  j["noise"] = c.noise.kind == data::NoiseKind::kNone ? std::string("none") : c.noise.str();
  j["eval"] = {{"batch_size", c.eval.batch_size}, {"threads", c.eval.threads}};
  j["energy"] = {{"count_mode", c.energy.count_mode == SpikeRecord::CountMode::kMagnitude
                                    ? "magnitude"
                                    : "nonzero"},
                 {"first_layer", energy::to_string(c.energy.first_layer)}};
  const auto& o = c.gradcheck.options;
  j["gradcheck"] = {{"h", o.h},          {"floor", o.floor},
                    {"ops_tol", o.ops_tol}, {"loss_tol", o.loss_tol},
                    {"e2e_tol", o.e2e_tol}, {"batch", c.gradcheck.batch},
                    {"max_params", c.gradcheck.max_params}};
  j["inspect"] = {{"samples", c.inspect.samples},
                  {"lo", c.inspect.bins.lo},
                  {"hi", c.inspect.bins.hi},
                  {"width", c.inspect.bins.width}};
  j["output"] = {{"dir", c.out_dir}};
  return j;
}

std::vector<train::LayerSpec> default_layers(const Shape& step_shape,
                                             std::size_t classes) {
  using train::LayerSpec;
  using train::LayerType;
  auto make = [](LayerType t, std::size_t out = 0) {
    LayerSpec l;
    l.type = t;
    l.out = out;
    return l;
  };
  std::vector<LayerSpec> layers;
  auto spiking_block = [&](LayerSpec affine) {
    layers.push_back(affine);
    layers.push_back(make(LayerType::kTdbn));
    layers.push_back(make(LayerType::kSpiking));
  };
  if (step_shape.rank() == 3) {
    for (std::size_t ch : {8, 16}) {
      LayerSpec conv = make(LayerType::kConv2d, ch);
      conv.kernel = 3;
      conv.padding = 1;
      conv.bias = false;
      spiking_block(conv);
      LayerSpec pool = make(LayerType::kPool);
      pool.kernel = 2;
      layers.push_back(pool);
    }
    layers.push_back(make(LayerType::kFlatten));
    spiking_block(make(LayerType::kLinear, 10 * classes));
  } else {
    if (step_shape.rank() != 1) layers.push_back(make(LayerType::kFlatten));
    spiking_block(make(LayerType::kLinear, 32));
    spiking_block(make(LayerType::kLinear, 32));
    spiking_block(make(LayerType::kLinear, 10 * classes));
  }
  LayerSpec vote = make(LayerType::kVoting);
  vote.classes = classes;
  layers.push_back(vote);
  return layers;
}

Datasets load_datasets(const RunConfig& c) {
  Datasets d;
  const auto& dc = c.data;
  if (dc.synthetic()) {
    d.train = data::synth_dataset(dc.synth, dc.n_train, c.seed, "train");
    d.test = data::synth_dataset(dc.synth, dc.n_test, c.seed, "test");
  } else if (dc.kind == "idx") {
    d.train = data::load_idx(dc.train_images, dc.train_labels, dc.classes, "train");
    d.test = data::load_idx(dc.test_images, dc.test_labels, dc.classes, "test");
  } else {
    d.train = data::load_csv(dc.train_csv, dc.classes, "train");
    d.test = data::load_csv(dc.test_csv, dc.classes, "test");
  }
  if (d.train.sample_shape != d.test.sample_shape)
    throw ConfigError("data: train samples are " + d.train.sample_shape.str() +
                      " but test samples are " + d.test.sample_shape.str());
  if (c.noise.kind != data::NoiseKind::kNone)
    d.test = data::with_noise(d.test, c.noise, c.seed);
  return d;
}

void resolve_network(RunConfig& c, const data::Dataset& ds) {
  const Shape step = data::step_shape(ds, c.encoder);
  if (c.network.layers.empty()) {
    c.network.layers = default_layers(step, ds.classes);
    c.default_layers = true;
  }
  c.network.validate();
  if (c.network.classes() != ds.classes)
    throw ConfigError("network: voting layer has " + std::to_string(c.network.classes()) +
                      " classes but the data has " + std::to_string(ds.classes));
  if (c.data.augment && step.rank() != 3)
    throw ConfigError("data.augment needs image samples [C, H, W]");
}

}  // namespace cfsnn::cli
