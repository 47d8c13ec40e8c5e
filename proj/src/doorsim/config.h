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

#ifndef DOORSIM_CONFIG_H_
#define DOORSIM_CONFIG_H_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "doorsim/env/task_env.h"
#include "doorsim/rl/mppi.h"
#include "doorsim/rl/ppo.h"
#include "doorsim/sim/pose_controller.h"
#include "doorsim/sim/rigid_body_world.h"

namespace doorsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalConfig {
  std::string experiment = "initial_distance";
  std::vector<double> sweep;  // empty = per-experiment default grid
  int trials_per_value = 20;
  double timeout_seconds = 60.0;
  double success_band = 0.1;
  bool write_traces = false;
};

struct RuntimeConfig {
  int threads = 0;                      // 0 = hardware concurrency
  std::string kernel_backend = "auto";  // auto | scalar | avx2
};

// Aggregate of every tunable. Values load from a flat `section.key = value`
// file, then from DOORSIM_SECTION__KEY environment variables, then from
// --override section.key=value flags, most specific last. Unknown keys are
// hard errors; there are no silent defaults for misspellings.
struct Config {
  GeometryConfig geometry;
  PoseGains pose;
  EpisodeConfig episode;
  RandomizationConfig randomization;
  PpoConfig ppo;
  MppiConfig mppi;
  EvalConfig eval;
  RuntimeConfig runtime;

  // Known keys in declaration order.
  static std::vector<std::string> Keys();

  void Set(const std::string& key, const std::string& value);
  std::string Get(const std::string& key) const;

  void LoadFile(const std::string& path);
  void ApplyOverride(const std::string& key_equals_value);
  void ApplyEnvOverrides();

  // Throws ConfigError listing every violated invariant.
  void Validate() const;

  // Ordered key=value snapshot; applying it to a default Config reproduces
  // this one exactly.
  std::vector<std::pair<std::string, std::string>> Snapshot() const;
};

}  // namespace doorsim

#endif  // DOORSIM_CONFIG_H_
