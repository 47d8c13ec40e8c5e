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

#ifndef DOORSIM_EVAL_HARNESS_H_
#define DOORSIM_EVAL_HARNESS_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "doorsim/csv.h"
#include "doorsim/env/task_env.h"
#include "doorsim/nn/agent.h"
#include "doorsim/rl/mppi.h"

namespace doorsim {

enum class ExperimentKind {
  kInitialDistance,  // spawn radius sweep around the handle
  kLateralOffset,    // handle observation shifted along y_D
  kVerticalOffset,   // handle observation shifted along z_D
  kDoorClosing,      // alpha starts open, target pi/2
};

ExperimentKind ParseExperimentKind(const std::string& name);
std::string ExperimentKindName(ExperimentKind kind);
std::vector<double> DefaultSweep(ExperimentKind kind);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kInitialDistance;
  std::vector<double> sweep;
  int trials_per_value = 20;
  double timeout_seconds = 60.0;
  double success_band = 0.1;  // fraction of pi/2
  uint64_t seed = 0;
};

// Recomputes the hook-to-handle observation as if the handle were displaced
// by offset_D in its own frame; nothing else changes and the physics never
// sees the offset.
Observation ApplyObservationOffset(const Observation& obs, const Vec3& offset_D);

// What a controller gets to see each tick: the (possibly offset) observation,
// and a world whose handle matches that belief for model-based planners.
class TrialController {
 public:
  virtual ~TrialController() = default;
  virtual void BeginTrial(uint64_t seed) = 0;
  virtual std::array<double, kActionSize> Act(const Observation& obs,
                                              const WorldState& believed_world) = 0;
  // Replanning rate; the environment ticks the controller at this rate.
  virtual double ControlRateHz() const = 0;
  virtual std::string Name() const = 0;
};

// Deterministic (mean-action) policy playback from a checkpoint.
class PolicyController : public TrialController {
 public:
  PolicyController(Agent agent, double control_rate_hz);
  void BeginTrial(uint64_t seed) override;
  std::array<double, kActionSize> Act(const Observation& obs,
                                      const WorldState& believed_world) override;
  double ControlRateHz() const override { return control_rate_hz_; }
  std::string Name() const override { return "policy"; }

 private:
  Agent agent_;
  double control_rate_hz_;
  Mlp::Workspace ws_;
};

class MppiTrialController : public TrialController {
 public:
  MppiTrialController(const MppiConfig& cfg, const EpisodeConfig& episode,
                      const PoseGains& gains, const GeometryConfig& geometry);
  void BeginTrial(uint64_t seed) override;
  std::array<double, kActionSize> Act(const Observation& obs,
                                      const WorldState& believed_world) override;
  double ControlRateHz() const override { return 1.0 / cfg_.control_dt; }
  std::string Name() const override { return "mppi"; }

  const MppiDiagnostics& last_diagnostics() const { return diag_; }

 private:
  MppiConfig cfg_;
  MppiController mppi_;
  Rng rng_;
  MppiDiagnostics diag_;
};

struct TrialResult {
  bool success = false;
  double completion_time = 0.0;  // valid when success
  double final_angle = 0.0;
  Termination termination = Termination::kRunning;
};

struct SweepRow {
  double value = 0.0;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_time_s = 0.0;  // over successful trials
  double std_time_s = 0.0;
};

struct HarnessContext {
  GeometryConfig geometry;
  PoseGains gains;
  EpisodeConfig episode;
  RandomizationConfig randomization;
};

// Episode trace columns (one row per control tick), self-contained enough to
// re-derive every reward component.
const std::vector<std::string>& TraceHeader();
std::vector<double> TraceRow(const WorldState& world, const EnvStepResult& step,
                             double alpha_target);

// Runs one trial; trial_seed drives both the spawn randomization and the
// controller. If trace is non-null a row is appended per tick.
TrialResult RunTrial(const HarnessContext& ctx, ExperimentKind kind, double value,
                     TrialController* controller, uint64_t trial_seed,
                     CsvWriter* trace);

// Sweeps all values; writes one results row per value to results_csv and
// optional per-trial traces into traces_dir. Trial seeds depend only on the
// trial index, so the offset experiments share physics across sweep values.
std::vector<SweepRow> RunSweep(const HarnessContext& ctx, const ExperimentSpec& spec,
                               TrialController* controller,
                               const std::string& results_csv,
                               const std::string& traces_dir);

}  // namespace doorsim

#endif  // DOORSIM_EVAL_HARNESS_H_
