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

#pragma once

// Command-line entry points. Every command returns a process exit code:
//
//   0  success
//   1  a check failed (gradcheck threshold, bad usage of a command)
//   2  configuration error (schema, unknown key, invalid value)
//   3  numeric error (non-finite loss or gradient)
//   4  I/O error (unreadable input, malformed file, write failure)

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cfsnn/cli/run_config.hpp"

namespace cfsnn::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitIo = 4,
};

const char* version();

struct CommonArgs {
  std::string config;  // empty: defaults (or the checkpoint's configuration)
  std::vector<std::string> overrides;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> noise;
};

// Config file (or `base`), then --set overrides, then --seed/--noise/--out.
RunConfig build_config(const CommonArgs& args,
                       const nlohmann::json& base = nlohmann::json::object());

// Resolves file names inside one directory and refuses anything that would
// land outside it.
class OutputDir {
 public:
  explicit OutputDir(std::string dir);
  // `relative` may contain subdirectories but no "..", and may not be
  // absolute. Parent directories are created.
  std::string path(const std::string& relative) const;
  const std::string& root() const { return dir_; }

 private:
  std::string dir_;
};

struct EvalArgs {
  std::string checkpoint;
};

struct GradcheckArgs {
  // "op" or "op:factor"; corrupts that op's backward rule for the run.
  std::string inject_fault;
};

struct EnergyArgs {
  std::string checkpoint;
  std::optional<double> sops;  // arithmetic mode, no model
};

struct InspectArgs {
  std::string checkpoint;  // empty: a freshly initialized network
  std::string what;        // membranes | alphas | spikes
};

int cmd_train(const CommonArgs& args, std::ostream& out);
int cmd_eval(const CommonArgs& args, const EvalArgs& e, std::ostream& out);
int cmd_gradcheck(const CommonArgs& args, const GradcheckArgs& g, std::ostream& out);
int cmd_energy(const CommonArgs& args, const EnergyArgs& e, std::ostream& out);
int cmd_inspect(const CommonArgs& args, const InspectArgs& i, std::ostream& out);

// Parses argv, dispatches, and maps exceptions to exit codes with a message
// on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cfsnn::cli
