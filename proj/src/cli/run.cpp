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

#include <ostream>

#include <CLI11.hpp>

#include "cfsnn/cli/commands.hpp"

namespace cfsnn::cli {

namespace {

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "JSON run configuration");
  cmd->add_option("--set", a.overrides, "Override a config key, e.g. train.lr=0.05")
      ->take_all();
  cmd->add_option("--out", a.out, "Output directory (output.dir)");
  cmd->add_option("--seed", a.seed, "Random seed");
  cmd->add_option("--noise", a.noise, "Test-input noise, kind:epsilon");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Direct training of spiking neural networks", "cfsnn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  CommonArgs common;
  EvalArgs eval_args;
  GradcheckArgs grad_args;
  EnergyArgs energy_args;
  InspectArgs inspect_args;

  auto* train = app.add_subcommand("train", "Train a network and write metrics, checkpoints and a manifest");
  add_common(train, common);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  add_common(eval, common);
  eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file")->required();

  auto* grad = app.add_subcommand("gradcheck", "Compare backward rules with finite differences");
  add_common(grad, common);
  grad->add_option("--inject-fault", grad_args.inject_fault,
                   "Corrupt one op's backward rule (op or op:factor)");

  auto* en = app.add_subcommand("energy", "Estimate inference energy from measured firing rates");
  add_common(en, common);
  en->add_option("--checkpoint", energy_args.checkpoint, "Checkpoint file");
  en->add_option("--sops", energy_args.sops, "Convert a SOP count to energy without a model");

  auto* insp = app.add_subcommand("inspect", "Dump membranes, alphas or spike counts as CSV");
  add_common(insp, common);
  insp->add_option("--checkpoint", inspect_args.checkpoint,
                   "Checkpoint file (default: freshly initialized network)");
  insp->add_option("--what", inspect_args.what, "membranes, alphas or spikes")
      ->required()
      ->check(CLI::IsMember({"membranes", "alphas", "spikes"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*train) return cmd_train(common, out);
    if (*eval) return cmd_eval(common, eval_args, out);
    if (*grad) return cmd_gradcheck(common, grad_args, out);
    if (*en) return cmd_energy(common, energy_args, out);
    if (*insp) return cmd_inspect(common, inspect_args, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ShapeError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitCheckFailed;
}

}  // namespace cfsnn::cli
