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

#include "cfsnn/train/spec.hpp"

#include "cfsnn/core/json_config.hpp"

namespace cfsnn::train {

using config::check_keys;
using config::get;
using json = nlohmann::json;

std::string to_string(LayerType t) {
  switch (t) {
    case LayerType::kLinear: return "linear";
    case LayerType::kConv2d: return "conv2d";
    case LayerType::kTdbn: return "tdbn";
    case LayerType::kSpiking: return "spiking";
    case LayerType::kResidual: return "residual";
    case LayerType::kPool: return "pool";
    case LayerType::kFlatten: return "flatten";
    case LayerType::kVoting: return "voting";
  }
  return "?";
}

LayerType parse_layer_type(const std::string& s) {
  for (auto t : {LayerType::kLinear, LayerType::kConv2d, LayerType::kTdbn,
                 LayerType::kSpiking, LayerType::kResidual, LayerType::kPool,
                 LayerType::kFlatten, LayerType::kVoting})
    if (to_string(t) == s) return t;
  throw ConfigError("unknown layer type '" + s + "'");
}

void NetworkSpec::validate() const {
  if (steps == 0) throw ConfigError("network.T must be >= 1");
  if (layers.empty()) throw ConfigError("network.layers is empty");
  neuron.validate();
  surrogate.validate();
  if (surrogate.family == surrogate::Family::kTsg) {
    if (!(tsg.scale > 0)) throw ConfigError("surrogate.tsg.scale must be > 0");
    if (!(tsg.bias >= 0)) throw ConfigError("surrogate.tsg.bias must be >= 0");
  }
  if (!(bn_eps >= 0)) throw ConfigError("network.bn_eps must be >= 0");

  std::size_t votes = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string at = "network.layers[" + std::to_string(i) + "]";
    switch (l.type) {
      case LayerType::kLinear:
      case LayerType::kConv2d:
      case LayerType::kResidual:
        if (l.out == 0) throw ConfigError(at + ".out must be >= 1");
        if (l.stride == 0) throw ConfigError(at + ".stride must be >= 1");
        if (l.type == LayerType::kConv2d && l.kernel == 0)
          throw ConfigError(at + ".kernel must be >= 1");
        break;
      case LayerType::kPool:
        if (l.kernel == 0) throw ConfigError(at + ".kernel must be >= 1");
        break;
      case LayerType::kSpiking: {
        if (i == 0) throw ConfigError(at + ": a spiking layer cannot come first");
        const auto prev = layers[i - 1].type;
        if (prev != LayerType::kLinear && prev != LayerType::kConv2d &&
            prev != LayerType::kTdbn && prev != LayerType::kResidual)
          throw ConfigError(at + ": a spiking layer must follow linear, conv2d, "
                                 "tdbn or residual, not " + to_string(prev));
        NeuronConfig c = neuron;
        if (l.neuron_kind) c.kind = *l.neuron_kind;
        c.validate();
        break;
      }
      case LayerType::kVoting:
        ++votes;
        if (l.classes < 2) throw ConfigError(at + ".classes must be >= 2");
        if (i + 1 != layers.size())
          throw ConfigError(at + ": voting must be the last layer");
        if (i == 0 || layers[i - 1].type != LayerType::kSpiking)
          throw ConfigError(at + ": voting must read a spiking layer");
        break;
      default:
        break;
    }
    if (l.type == LayerType::kResidual &&
        (i + 1 >= layers.size() || layers[i + 1].type != LayerType::kSpiking))
      throw ConfigError(at + ": a residual block must feed a spiking layer");
  }
  if (votes != 1 || layers.back().type != LayerType::kVoting)
    throw ConfigError("network must end in exactly one voting layer");
}

std::size_t NetworkSpec::classes() const {
  return layers.empty() ? 0 : layers.back().classes;
}

json to_json(const LayerSpec& l) {
  json j;
  j["type"] = to_string(l.type);
  switch (l.type) {
    case LayerType::kLinear:
      j["out"] = l.out;
      j["bias"] = l.bias;
      break;
    case LayerType::kConv2d:
      j["out"] = l.out;
      j["kernel"] = l.kernel;
      j["stride"] = l.stride;
      j["padding"] = l.padding;
      j["bias"] = l.bias;
      break;
    case LayerType::kResidual:
      j["out"] = l.out;
      j["stride"] = l.stride;
      break;
    case LayerType::kPool:
      j["mode"] = l.max_pool ? "max" : "avg";
      j["kernel"] = l.kernel;
      break;
    case LayerType::kVoting:
      j["classes"] = l.classes;
      break;
    case LayerType::kSpiking:
      if (l.neuron_kind) j["neuron"] = to_string(*l.neuron_kind);
      break;
    default:
      break;
  }
  return j;
}

LayerSpec layer_from_json(const json& j, const std::string& path) {
  config::require_object(j, path);
  LayerSpec l;
  const auto type = get<std::string>(j, path, "type", "");
  if (type.empty()) throw ConfigError(path + ".type: missing");
  try {
    l.type = parse_layer_type(type);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ".type: " + e.what());
  }
  switch (l.type) {
    case LayerType::kLinear:
      check_keys(j, path, {"type", "out", "bias"});
      l.out = get<std::size_t>(j, path, "out", 0);
      l.bias = get<bool>(j, path, "bias", true);
      break;
    case LayerType::kConv2d:
      check_keys(j, path, {"type", "out", "kernel", "stride", "padding", "bias"});
      l.out = get<std::size_t>(j, path, "out", 0);
      l.kernel = get<std::size_t>(j, path, "kernel", 3);
      l.stride = get<std::size_t>(j, path, "stride", 1);
      l.padding = get<std::size_t>(j, path, "padding", 0);
      l.bias = get<bool>(j, path, "bias", true);
      break;
    case LayerType::kResidual:
      check_keys(j, path, {"type", "out", "stride"});
      l.out = get<std::size_t>(j, path, "out", 0);
      l.stride = get<std::size_t>(j, path, "stride", 1);
      break;
    case LayerType::kPool: {
      check_keys(j, path, {"type", "mode", "kernel"});
      const auto mode = get<std::string>(j, path, "mode", "avg");
      if (mode != "avg" && mode != "max")
        throw ConfigError(path + ".mode: expected avg or max, got " + mode);
      l.max_pool = mode == "max";
      l.kernel = get<std::size_t>(j, path, "kernel", 2);
      break;
    }
    case LayerType::kVoting:
      check_keys(j, path, {"type", "classes"});
      l.classes = get<std::size_t>(j, path, "classes", 0);
      break;
    case LayerType::kSpiking:
      check_keys(j, path, {"type", "neuron"});
      if (j.contains("neuron")) {
        try {
          l.neuron_kind = parse_neuron_kind(get<std::string>(j, path, "neuron", ""));
        } catch (const ConfigError& e) {
          throw ConfigError(path + ".neuron: " + e.what());
        }
      }
      break;
    default:
      check_keys(j, path, {"type"});
      break;
  }
  return l;
}

json to_json(const NeuronConfig& c) {
  return {{"kind", to_string(c.kind)},     {"k_tau", c.k_tau},
          {"theta_p", c.theta_p},          {"theta_n", c.theta_n},
          {"k_p_max", c.k_p_max},          {"k_n_max", c.k_n_max},
          {"reset_mode", to_string(c.reset_mode)}, {"u_reset", c.u_reset}};
}

NeuronConfig neuron_from_json(const json& j, const std::string& path,
                              NeuronConfig c) {
  check_keys(j, path, {"kind", "k_tau", "theta_p", "theta_n", "k_p_max",
                       "k_n_max", "reset_mode", "u_reset"});
  try {
    if (j.contains("kind"))
      c.kind = parse_neuron_kind(get<std::string>(j, path, "kind", ""));
    if (j.contains("reset_mode"))
      c.reset_mode = parse_reset_mode(get<std::string>(j, path, "reset_mode", ""));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  c.k_tau = get<real>(j, path, "k_tau", c.k_tau);
  c.theta_p = get<real>(j, path, "theta_p", c.theta_p);
  c.theta_n = get<real>(j, path, "theta_n", c.theta_n);
  c.k_p_max = get<int>(j, path, "k_p_max", c.k_p_max);
  c.k_n_max = get<int>(j, path, "k_n_max", c.k_n_max);
  c.u_reset = get<real>(j, path, "u_reset", c.u_reset);
  return c;
}

json to_json(const surrogate::SurrogateSpec& s, const TsgInit& t) {
  return {{"family", surrogate::to_string(s.family)},
          {"alpha", s.alpha},
          {"composition", surrogate::to_string(s.composition)},
          {"tsg", {{"scale", t.scale}, {"bias", t.bias}, {"init_x", t.init_x}}}};
}

void surrogate_from_json(const json& j, const std::string& path,
                         surrogate::SurrogateSpec& s, TsgInit& t) {
  check_keys(j, path, {"family", "alpha", "composition", "tsg"});
  try {
    if (j.contains("family"))
      s.family = surrogate::parse_family(get<std::string>(j, path, "family", ""));
    if (j.contains("composition"))
      s.composition = surrogate::parse_composition(
          get<std::string>(j, path, "composition", ""));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  s.alpha = get<real>(j, path, "alpha", s.alpha);
  if (j.contains("tsg")) {
    const auto& g = j["tsg"];
    const std::string p = path + ".tsg";
    check_keys(g, p, {"scale", "bias", "init_x"});
    t.scale = get<real>(g, p, "scale", t.scale);
    t.bias = get<real>(g, p, "bias", t.bias);
    t.init_x = get<real>(g, p, "init_x", t.init_x);
  }
}

json to_json(const NetworkSpec& n) {
  json layers = json::array();
  for (const auto& l : n.layers) layers.push_back(to_json(l));
  return {{"T", n.steps},
          {"bn_eps", n.bn_eps},
          {"layers", layers},
          {"neuron", to_json(n.neuron)},
          {"surrogate", to_json(n.surrogate, n.tsg)}};
}

NetworkSpec network_from_json(const json& j) {
  check_keys(j, "network", {"T", "bn_eps", "layers", "neuron", "surrogate"});
  NetworkSpec n;
  n.steps = get<std::size_t>(j, "network", "T", n.steps);
  n.bn_eps = get<real>(j, "network", "bn_eps", n.bn_eps);
  if (j.contains("layers")) {
    if (!j["layers"].is_array())
      throw ConfigError("network.layers: expected an array");
    for (std::size_t i = 0; i < j["layers"].size(); ++i)
      n.layers.push_back(layer_from_json(
          j["layers"][i], "network.layers[" + std::to_string(i) + "]"));
  }
  if (j.contains("neuron")) n.neuron = neuron_from_json(j["neuron"], "neuron");
  if (j.contains("surrogate"))
    surrogate_from_json(j["surrogate"], "surrogate", n.surrogate, n.tsg);
  return n;
}

void TrainConfig::validate() const {
  if (!(lr >= 0)) throw ConfigError("train.lr must be >= 0");
  if (!(momentum >= 0 && momentum < 1))
    throw ConfigError("train.momentum must lie in [0, 1)");
  if (!(weight_decay >= 0)) throw ConfigError("train.weight_decay must be >= 0");
  if (batch_size < 2)
    throw ConfigError("train.batch_size must be >= 2 for batch statistics");
  if (tsg_lr && !(*tsg_lr >= 0)) throw ConfigError("train.tsg_lr must be >= 0");
}

json to_json(const TrainConfig& c) {
  json j = {{"lr", c.lr},
            {"momentum", c.momentum},
            {"weight_decay", c.weight_decay},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"schedule", c.schedule == Schedule::kCosine ? "cosine" : "constant"},
            {"checkpoint_every", c.checkpoint_every},
            {"freeze_tsg", c.freeze_tsg}};
  j["tsg_lr"] = c.tsg_lr ? json(*c.tsg_lr) : json(nullptr);
  return j;
}

TrainConfig train_from_json(const json& j, const std::string& path) {
  check_keys(j, path, {"lr", "momentum", "weight_decay", "epochs", "batch_size",
                       "schedule", "tsg_lr", "checkpoint_every", "freeze_tsg"});
  TrainConfig c;
  c.lr = get<real>(j, path, "lr", c.lr);
  c.momentum = get<real>(j, path, "momentum", c.momentum);
  c.weight_decay = get<real>(j, path, "weight_decay", c.weight_decay);
  c.epochs = get<std::size_t>(j, path, "epochs", c.epochs);
  c.batch_size = get<std::size_t>(j, path, "batch_size", c.batch_size);
  c.checkpoint_every = get<std::size_t>(j, path, "checkpoint_every", 0);
  c.freeze_tsg = get<bool>(j, path, "freeze_tsg", false);
  const auto sched = get<std::string>(j, path, "schedule", "cosine");
  if (sched == "cosine")
    c.schedule = Schedule::kCosine;
  else if (sched == "constant")
    c.schedule = Schedule::kConstant;
  else
    throw ConfigError(path + ".schedule: expected cosine or constant, got " + sched);
  if (j.contains("tsg_lr") && !j["tsg_lr"].is_null())
    c.tsg_lr = get<real>(j, path, "tsg_lr", 0);
  return c;
}

}  // namespace cfsnn::train
