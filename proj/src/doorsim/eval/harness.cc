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

#include "doorsim/eval/harness.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <stdexcept>

namespace doorsim {

ExperimentKind ParseExperimentKind(const std::string& name) {
  if (name == "initial_distance") return ExperimentKind::kInitialDistance;
  if (name == "lateral_offset") return ExperimentKind::kLateralOffset;
  if (name == "vertical_offset") return ExperimentKind::kVerticalOffset;
  if (name == "door_closing") return ExperimentKind::kDoorClosing;
  throw std::runtime_error("unknown experiment: " + name);
}

std::string ExperimentKindName(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kInitialDistance:
      return "initial_distance";
    case ExperimentKind::kLateralOffset:
      return "lateral_offset";
    case ExperimentKind::kVerticalOffset:
      return "vertical_offset";
    case ExperimentKind::kDoorClosing:
      return "door_closing";
  }
  return "unknown";
}

std::vector<double> DefaultSweep(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kInitialDistance:
      return {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4};
    case ExperimentKind::kLateralOffset:
    case ExperimentKind::kVerticalOffset:
      return {-0.12, -0.09, -0.06, -0.03, 0.0, 0.03, 0.06, 0.09, 0.12};
    case ExperimentKind::kDoorClosing:
      return {0.0};
  }
  return {};
}

Observation ApplyObservationOffset(const Observation& obs, const Vec3& offset_D) {
  Observation out = obs;
  out.hook_to_handle_B = obs.hook_to_handle_B - obs.rot_BD * offset_D;
  return out;
}

PolicyController::PolicyController(Agent agent, double control_rate_hz)
    : agent_(std::move(agent)), control_rate_hz_(control_rate_hz) {}

void PolicyController::BeginTrial(uint64_t /*seed*/) {}

std::array<double, kActionSize> PolicyController::Act(
    const Observation& obs, const WorldState& /*believed_world*/) {
  std::array<double, kObservationSize> flat = obs.Flatten();
  std::array<double, kObservationSize> normalized;
  agent_.normalizer.Apply(flat.data(), normalized.data(), 1);
  return agent_.PolicyMean(normalized, &ws_);
}

MppiTrialController::MppiTrialController(const MppiConfig& cfg,
                                         const EpisodeConfig& episode,
                                         const PoseGains& gains,
                                         const GeometryConfig& geometry)
    : cfg_(cfg), mppi_(cfg, episode, gains, geometry), rng_(0) {}

void MppiTrialController::BeginTrial(uint64_t seed) {
  rng_ = Rng(seed);
  mppi_.Reset();
}

std::array<double, kActionSize> MppiTrialController::Act(
    const Observation& /*obs*/, const WorldState& believed_world) {
  ControlStep u = mppi_.Plan(believed_world, rng_, &diag_);
  return ControlToRawAction(u);
}

const std::vector<std::string>& TraceHeader() {
  static const std::vector<std::string> header = {
      "time",      "alpha",    "alpha_target", "phd_x",    "phd_y",
      "phd_z",     "theta_hd", "vx",           "vy",       "vz",
      "wx",        "wy",       "wz",           "fx",       "fy",
      "fz",        "tx",       "ty",           "tz",       "r_h_dist",
      "r_h_in",    "r_att",    "r_d_dist",     "r_d_open", "r_vel_lin",
      "r_vel_ang", "r_tau",    "total"};
  return header;
}

std::vector<double> TraceRow(const WorldState& world, const EnvStepResult& step,
                             double alpha_target) {
  const Observation& obs = step.observation;
  const RewardBreakdown& r = step.reward;
  return {world.time,
          world.door.angle,
          alpha_target,
          obs.hook_to_handle_B.x,
          obs.hook_to_handle_B.y,
          obs.hook_to_handle_B.z,
          -r.r_att,  // theta_hd
          obs.linear_velocity_B.x,
          obs.linear_velocity_B.y,
          obs.linear_velocity_B.z,
          obs.angular_velocity_B.x,
          obs.angular_velocity_B.y,
          obs.angular_velocity_B.z,
          step.reward_wrench.force_B.x,
          step.reward_wrench.force_B.y,
          step.reward_wrench.force_B.z,
          step.reward_wrench.torque_B.x,
          step.reward_wrench.torque_B.y,
          step.reward_wrench.torque_B.z,
          r.r_h_dist,
          r.r_h_in,
          r.r_att,
          r.r_d_dist,
          r.r_d_open,
          r.r_vel_lin,
          r.r_vel_ang,
          r.r_tau,
          r.total};
}

namespace {

Vec3 SampleFrontHalfSphere(Rng& rng) {
  Vec3 dir{rng.Normal(), rng.Normal(), rng.Normal()};
  double n = Norm(dir);
  if (n < 1e-12) return {-1.0, 0.0, 0.0};
  dir = dir / n;
  if (dir.x > 0.0) dir.x = -dir.x;  // robot side of the door
  return dir;
}

}  // namespace

TrialResult RunTrial(const HarnessContext& ctx, ExperimentKind kind, double value,
                     TrialController* controller, uint64_t trial_seed,
                     CsvWriter* trace) {
  EpisodeConfig episode = ctx.episode;
  episode.alpha_target = kind == ExperimentKind::kDoorClosing ? M_PI / 2.0 : 0.0;

  // Keep the physics substep identical to training and adjust the substep
  // count to the controller's replanning rate.
  double dt = ctx.episode.SubstepDt();
  episode.control_rate_hz = controller->ControlRateHz();
  episode.physics_substeps =
      std::max(1, static_cast<int>(std::lround(episode.ControlDt() / dt)));

  TaskEnv env(ctx.geometry, ctx.gains, episode, ctx.randomization,
              Rng::Split(trial_seed, 0));
  controller->BeginTrial(Rng::Split(trial_seed, 1));

  Vec3 obs_offset_D{};
  Observation obs;
  switch (kind) {
    case ExperimentKind::kInitialDistance: {
      Rng dir_rng(Rng::Split(trial_seed, 2));
      Vec3 hook_pos_D = SampleFrontHalfSphere(dir_rng) * value;
      obs = env.ResetAtRich(hook_pos_D, M_PI / 2.0);
      break;
    }
    case ExperimentKind::kLateralOffset:
      obs_offset_D = {0.0, value, 0.0};
      obs = env.ResetRich();
      break;
    case ExperimentKind::kVerticalOffset:
      obs_offset_D = {0.0, 0.0, value};
      obs = env.ResetRich();
      break;
    case ExperimentKind::kDoorClosing:
      obs = env.ResetAtRich(Vec3{value, 0.0, 0.0}, 0.0);
      break;
  }

  TrialResult result;
  while (true) {
    Observation perceived = ApplyObservationOffset(obs, obs_offset_D);
    WorldState believed = env.world();
    believed.door.handle_offset_D += obs_offset_D;

    std::array<double, kActionSize> action = controller->Act(perceived, believed);
    EnvStepResult step = env.StepRich(action);
    if (trace != nullptr) {
      trace->WriteDoubles(TraceRow(env.world(), step, episode.alpha_target));
    }
    obs = step.observation;

    if (step.done) {
      result.success = step.termination == Termination::kSuccess;
      result.completion_time = env.world().time;
      result.final_angle = env.world().door.angle;
      result.termination = step.termination;
      return result;
    }
  }
}

std::vector<SweepRow> RunSweep(const HarnessContext& ctx, const ExperimentSpec& spec,
                               TrialController* controller,
                               const std::string& results_csv,
                               const std::string& traces_dir) {
  if (spec.sweep.empty()) throw std::runtime_error("experiment sweep is empty");
  EpisodeConfig episode = ctx.episode;
  episode.max_episode_seconds = spec.timeout_seconds;
  episode.success_band = spec.success_band;
  HarnessContext run_ctx = ctx;
  run_ctx.episode = episode;

  CsvWriter out(results_csv, {"experiment", "value", "trials", "successes",
                              "success_rate", "mean_time_s", "std_time_s"});
  if (!traces_dir.empty()) std::filesystem::create_directories(traces_dir);

  std::vector<SweepRow> rows;
  for (size_t vi = 0; vi < spec.sweep.size(); vi++) {
    double value = spec.sweep[vi];
    SweepRow row;
    row.value = value;
    row.trials = spec.trials_per_value;

    double time_sum = 0.0, time_sq_sum = 0.0;
    for (int trial = 0; trial < spec.trials_per_value; trial++) {
      // Seeds depend on the trial index only: identical physics across sweep
      // values for the observation-offset experiments.
      uint64_t trial_seed = Rng::Split(spec.seed, static_cast<uint64_t>(trial));

      std::unique_ptr<CsvWriter> trace;
      if (!traces_dir.empty()) {
        std::string path = traces_dir + "/" + ExperimentKindName(spec.kind) + "_v" +
                           std::to_string(vi) + "_t" + std::to_string(trial) + ".csv";
        trace = std::make_unique<CsvWriter>(path, TraceHeader());
      }

      TrialResult res =
          RunTrial(run_ctx, spec.kind, value, controller, trial_seed, trace.get());
      if (res.success) {
        row.successes++;
        time_sum += res.completion_time;
        time_sq_sum += res.completion_time * res.completion_time;
      }
    }

    row.success_rate = static_cast<double>(row.successes) / row.trials;
    if (row.successes > 0) {
      row.mean_time_s = time_sum / row.successes;
      double var = time_sq_sum / row.successes - row.mean_time_s * row.mean_time_s;
      row.std_time_s = std::sqrt(std::fmax(0.0, var));
    } else {
      row.mean_time_s = std::nan("");
      row.std_time_s = std::nan("");
    }
    rows.push_back(row);

    out.WriteRow({ExperimentKindName(spec.kind), CsvDouble(value),
                  std::to_string(row.trials), std::to_string(row.successes),
                  CsvDouble(row.success_rate), CsvDouble(row.mean_time_s),
                  CsvDouble(row.std_time_s)});
  }
  return rows;
}

}  // namespace doorsim
