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

#include "cfsnn/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "cfsnn/train/checkpoint.hpp"
#include "cfsnn/train/trainer.hpp"

namespace cfsnn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef CFSNN_VERSION
#define CFSNN_VERSION "0.0.0"
#endif

const char* version() { return CFSNN_VERSION; }

RunConfig build_config(const CommonArgs& args, const json& base) {
  json j = args.config.empty() ? base : load_json_file(args.config);
  if (j.is_null()) j = json::object();
  // A run manifest carries its configuration under "config".
  if (j.is_object() && j.contains("tool") && j.contains("config")) j = json(j["config"]);
  for (const auto& o : args.overrides) apply_override(j, o);
  if (args.seed) j["seed"] = *args.seed;
  if (args.noise) j["noise"] = *args.noise;
  if (args.out) j["output"]["dir"] = *args.out;
  return parse_run_config(j);
}

OutputDir::OutputDir(std::string dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create output directory '" + dir_ + "': " + ec.message());
}

std::string OutputDir::path(const std::string& relative) const {
  const fs::path rel(relative);
  if (relative.empty() || rel.is_absolute())
    throw IoError("output file '" + relative + "' must be a relative name");
  for (const auto& part : rel)
    if (part == "..") throw IoError("output file '" + relative + "' escapes the output directory");
  const fs::path full = fs::path(dir_) / rel;
  std::error_code ec;
  fs::create_directories(full.parent_path(), ec);
  if (ec) throw IoError("cannot create '" + full.parent_path().string() + "': " + ec.message());
  return full.string();
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  return f;
}

void close_out(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoError("write to '" + path + "' failed");
}

void write_json(const OutputDir& od, const std::string& name, const json& j) {
  const auto p = od.path(name);
  auto f = open_out(p);
  f << j.dump(2) << '\n';
  close_out(f, p);
}

train::EvalOptions eval_options(const RunConfig& c) {
  train::EvalOptions eo;
  eo.encoder = c.encoder;
  eo.batch_size = c.eval.batch_size;
  eo.threads = c.eval.threads;
  eo.seed = c.seed ^ 0x7e57;
  return eo;
}

std::string fmt(double v, const char* f = "%.9g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Checkpoint plus the configuration to run it with: --config wins, then the
// configuration stored in the checkpoint, then defaults.
struct Loaded {
  RunConfig cfg;
  train::Network net;
};

Loaded load_model(const CommonArgs& args, const std::string& path) {
  train::Checkpoint ck = train::load_checkpoint(path);
  json base = ck.extra.contains("config") ? ck.extra["config"] : json::object();
  RunConfig cfg = build_config(args, base);
  train::Network net = train::network_from_checkpoint(ck);
  cfg.network = net.spec();
  cfg.encoder.steps = net.spec().steps;
  return {std::move(cfg), std::move(net)};
}

void check_input(const train::Network& net, const RunConfig& c, const data::Dataset& ds) {
  const Shape step = data::step_shape(ds, c.encoder);
  if (step != net.sample_shape())
    throw ConfigError("data: samples per step are " + step.str() +
                      " but the network expects " + net.sample_shape().str());
  if (net.spec().classes() != ds.classes)
    throw ConfigError("data: " + std::to_string(ds.classes) +
                      " classes but the network votes over " +
                      std::to_string(net.spec().classes()));
}

std::string epoch_name(std::size_t epoch) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "checkpoints/epoch_%04zu.ckpt", epoch);
  return buf;
}

}  // namespace

int cmd_train(const CommonArgs& args, std::ostream& out) {
  RunConfig cfg = build_config(args);
  Datasets ds = load_datasets(cfg);
  resolve_network(cfg, ds.train);
  const json echo = to_json(cfg);
  OutputDir od(cfg.out_dir);

  train::Network net(cfg.network, data::step_shape(ds.train, cfg.encoder), cfg.seed);
  const Rng::State rng_state = Rng(cfg.seed).state();
  const json extra = {{"config", echo}};

  const auto metrics_path = od.path("metrics.csv");
  auto metrics = open_out(metrics_path);
  train::write_metrics_header(metrics, net);
  metrics.flush();

  train::FitOptions fo;
  fo.train = cfg.train;
  fo.loss = cfg.loss;
  fo.encoder = cfg.encoder;
  fo.seed = cfg.seed;
  fo.augment = cfg.data.augment;
  fo.eval_threads = cfg.eval.threads;
  fo.metrics = &metrics;
  fo.on_epoch = [&](const train::EpochRow& r) {
    metrics.flush();
    out << "epoch " << r.epoch << "  lr " << fmt(r.lr, "%.5g") << "  loss "
        << fmt(r.train_loss, "%.4f") << "  test_acc " << fmt(r.test_acc, "%.4f")
        << "  firing_rate " << fmt(r.mean_firing_rate, "%.4f") << '\n';
    if (cfg.train.checkpoint_every && r.epoch % cfg.train.checkpoint_every == 0)
      train::save_checkpoint(od.path(epoch_name(r.epoch)), net, r.epoch, rng_state, extra);
  };
  const auto rows = train::fit(net, ds.train, ds.test, fo);
  close_out(metrics, metrics_path);
  train::save_checkpoint(od.path("final.ckpt"), net, rows.size(), rng_state, extra);

  json results = {{"epochs", rows.size()}};
  if (!rows.empty()) {
    results["final_test_acc"] = rows.back().test_acc;
    results["final_train_loss"] = rows.back().train_loss;
    results["final_firing_rate"] = rows.back().mean_firing_rate;
  }
  write_json(od, "manifest.json",
             {{"tool", "cfsnn"},
              {"version", version()},
              {"command", "train"},
              {"seed", cfg.seed},
              {"config", echo},
              {"results", results}});
  out << "wrote " << od.root() << "/{metrics.csv,final.ckpt,manifest.json}\n";
  return kExitOk;
}

int cmd_eval(const CommonArgs& args, const EvalArgs& e, std::ostream& out) {
  auto [cfg, net] = load_model(args, e.checkpoint);
  Datasets ds = load_datasets(cfg);
  check_input(net, cfg, ds.test);
  const auto m = train::evaluate(net, ds.test, eval_options(cfg));
  OutputDir od(cfg.out_dir);
  write_json(od, "eval.json",
             {{"checkpoint", e.checkpoint},
              {"noise", cfg.noise.kind == data::NoiseKind::kNone ? "none" : cfg.noise.str()},
              {"samples", m.samples},
              {"accuracy", m.accuracy},
              {"mean_loss", m.mean_loss},
              {"firing_rates", m.firing_rates}});
  out << "accuracy " << fmt(m.accuracy, "%.4f") << " on " << m.samples
      << " samples, mean loss " << fmt(m.mean_loss, "%.4f") << '\n';
  return kExitOk;
}

int cmd_gradcheck(const CommonArgs& args, const GradcheckArgs& g, std::ostream& out) {
  RunConfig cfg = build_config(args);
  Datasets ds = load_datasets(cfg);
  resolve_network(cfg, ds.train);
  train::Network net(cfg.network, data::step_shape(ds.train, cfg.encoder), cfg.seed);
  if (cfg.train.freeze_tsg) net.freeze_tsg(true);
  std::size_t count = 0;
  for (auto* p : net.parameters()) count += p->tensor.numel();
  if (count > cfg.gradcheck.max_params)
    throw ConfigError("gradcheck: network has " + std::to_string(count) +
                      " parameters, above gradcheck.max_params = " +
                      std::to_string(cfg.gradcheck.max_params));
  const std::size_t batch = std::min(cfg.gradcheck.batch, ds.train.size());
  std::vector<std::size_t> idx(batch), labels(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    idx[i] = i;
    labels[i] = ds.train.labels[i];
  }
  Rng rng = Rng(cfg.seed).split(0x6763);
  const ad::Tensor x = data::encode_batch(ds.train, idx, cfg.encoder, rng);

  struct FaultGuard {
    ~FaultGuard() { ad::debug::clear_backward_fault(); }
  } guard;
  if (!g.inject_fault.empty()) {
    const auto colon = g.inject_fault.find(':');
    const std::string op = g.inject_fault.substr(0, colon);
    real factor = real(1.5);
    if (colon != std::string::npos) {
      try {
        factor = static_cast<real>(std::stod(g.inject_fault.substr(colon + 1)));
      } catch (const std::exception&) {
        throw ConfigError("--inject-fault: bad factor in '" + g.inject_fault + "'");
      }
    }
    ad::debug::set_backward_fault(op, factor);
  }

  const auto& o = cfg.gradcheck.options;
  std::vector<train::CategoryResult> results;
  results.push_back(train::check_ops(o));
  results.push_back(train::check_losses(o));
  results.push_back(train::check_pnb(cfg.network.neuron, cfg.loss, o));
  results.push_back(train::check_end_to_end(net, x, labels, o));

  bool ok = true;
  json report = json::array();
  const train::CategoryResult* worst = nullptr;
  for (const auto& r : results) {
    if (r.skipped) {
      out << r.name << ": skipped (" << r.skip_reason << ")\n";
    } else {
      out << r.name << ": max_rel_err " << fmt(r.max_error, "%.3e") << " (tol "
          << fmt(r.tolerance, "%.0e") << ", " << r.elements << " elements, worst "
          << r.worst << ") " << (r.passed() ? "PASS" : "FAIL") << '\n';
    }
    if (!r.passed()) {
      ok = false;
      if (!worst || r.max_error / r.tolerance > worst->max_error / worst->tolerance)
        worst = &r;
    }
    report.push_back({{"category", r.name},
                      {"skipped", r.skipped},
                      {"max_rel_err", r.max_error},
                      {"tolerance", r.tolerance},
                      {"elements", r.elements},
                      {"worst", r.worst}});
  }
  OutputDir od(cfg.out_dir);
  write_json(od, "gradcheck.json", {{"passed", ok}, {"categories", report}});
  if (!ok) {
    out << "gradcheck failed; worst offender " << worst->worst << " in " << worst->name
        << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_energy(const CommonArgs& args, const EnergyArgs& e, std::ostream& out) {
  if (e.sops) {
    if (!(*e.sops >= 0)) throw ConfigError("--sops must be >= 0");
    const double j = energy::sop_joules(*e.sops);
    out << "sops: " << fmt(*e.sops, "%.6g") << '\n'
        << "snn_energy_mj: " << fmt(j * 1e3, "%.6g") << '\n'
        << "snn_energy: " << fmt(j * 1e3, "%.3g") << " mJ\n";
    return kExitOk;
  }
  if (e.checkpoint.empty()) throw ConfigError("energy: give --checkpoint or --sops");
  auto [cfg, net] = load_model(args, e.checkpoint);
  Datasets ds = load_datasets(cfg);
  check_input(net, cfg, ds.test);
  const auto m = train::evaluate(net, ds.test, eval_options(cfg));
  const auto flops = energy::count_flops(net);
  const auto rates = energy::measure_firing_rate(m.synapses, flops, cfg.energy.count_mode);
  const auto report =
      energy::estimate_energy(flops, rates, net.spec().steps, cfg.energy.first_layer);
  OutputDir od(cfg.out_dir);
  const auto csv_path = od.path("energy.csv");
  auto csv = open_out(csv_path);
  energy::write_csv(csv, report);
  close_out(csv, csv_path);
  const auto sum_path = od.path("energy_summary.txt");
  auto sum = open_out(sum_path);
  energy::write_summary(sum, report);
  close_out(sum, sum_path);
  energy::write_summary(out, report);
  return kExitOk;
}

int cmd_inspect(const CommonArgs& args, const InspectArgs& in, std::ostream& out) {
  RunConfig cfg;
  std::optional<train::Network> net;
  if (in.checkpoint.empty()) {
    cfg = build_config(args);
  } else {
    auto loaded = load_model(args, in.checkpoint);
    cfg = std::move(loaded.cfg);
    net.emplace(std::move(loaded.net));
  }
  OutputDir od(cfg.out_dir);

  Datasets ds = load_datasets(cfg);
  if (!net) {
    resolve_network(cfg, ds.train);
    net.emplace(cfg.network, data::step_shape(ds.train, cfg.encoder), cfg.seed);
  }
  check_input(*net, cfg, ds.test);

  if (in.what == "alphas") {
    const auto path = od.path("alphas.csv");
    auto f = open_out(path);
    const auto tsg = net->tsg_params();
    f << "layer,name,step,x,alpha\n";
    for (std::size_t l = 0; l < net->spiking_layers(); ++l)
      for (std::size_t t = 0; t < net->spec().steps; ++t)
        f << l << ',' << net->spiking_name(l) << ',' << t << ','
          << fmt(tsg.x[t * tsg.layers + l]) << ',' << fmt(net->alpha(t, l)) << '\n';
    close_out(f, path);
    out << "wrote " << path << '\n';
    return kExitOk;
  }

  data::Dataset sub = ds.test;
  const std::size_t n = std::min(cfg.inspect.samples, sub.size());
  sub.labels.resize(n);
  sub.features.resize(n * sub.sample_numel());
  train::EvalOptions eo = eval_options(cfg);
  eo.capture_membranes = in.what == "membranes";
  eo.capture_spikes = in.what == "spikes";
  const auto m = train::evaluate(*net, sub, eo);

  if (in.what == "membranes") {
    const auto h = membrane_histogram(m.membranes, cfg.inspect.bins,
                                      net->spec().neuron.k_tau, net->spec().neuron.theta_p);
    const auto path = od.path("membranes.csv");
    auto f = open_out(path);
    h.write_csv(f);
    close_out(f, path);
    out << "wrote " << path << '\n';
    return kExitOk;
  }
  if (in.what == "spikes") {
    const auto path = od.path("spikes.csv");
    auto f = open_out(path);
    f << "layer,name,value,count\n";
    for (std::size_t l = 0; l < m.spike_values.size(); ++l) {
      std::map<long, std::size_t> counts;
      for (real v : m.spike_values[l]) ++counts[std::lround(v)];
      for (const auto& [v, c] : counts)
        f << l << ',' << net->spiking_name(l) << ',' << v << ',' << c << '\n';
    }
    close_out(f, path);
    out << "wrote " << path << '\n';
    return kExitOk;
  }
  throw ConfigError("inspect: unknown --what '" + in.what +
                    "' (expected membranes, alphas or spikes)");
}

}  // namespace cfsnn::cli
