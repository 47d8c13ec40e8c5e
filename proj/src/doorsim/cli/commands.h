// Copyright 2026 The doorsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DOORSIM_CLI_COMMANDS_H_
#define DOORSIM_CLI_COMMANDS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "doorsim/config.h"

namespace doorsim {

// Exit codes: 0 success, 1 usage/config error, 2 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

struct CommonArgs {
  std::string config_path;             // optional; defaults-only when empty
  std::vector<std::string> overrides;  // section.key=value
  uint64_t seed = 1;
  std::string out_dir;
};

struct EvalArgs {
  CommonArgs common;
  std::string controller = "policy";  // policy | mppi
  std::string checkpoint;             // required for policy
  std::string experiment;             // overrides eval.experiment when set
};

struct ReplayArgs {
  CommonArgs common;  // config supplies reward thresholds; out_dir unused
  std::string trace_path;
};

// Builds the effective config: defaults -> file -> environment -> overrides,
// then validates. Throws ConfigError.
Config ResolveConfig(const CommonArgs& args);

int CmdTrain(const CommonArgs& args);
int CmdEval(const EvalArgs& args);
int CmdReplay(const ReplayArgs& args);

// Full argv entry point used by the binary.
int RunCli(int argc, char** argv);

}  // namespace doorsim

#endif  // DOORSIM_CLI_COMMANDS_H_
