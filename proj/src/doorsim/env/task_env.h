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

#ifndef DOORSIM_ENV_TASK_ENV_H_
#define DOORSIM_ENV_TASK_ENV_H_

#include <array>
#include <utility>

#include "doorsim/geometry.h"
#include "doorsim/rng.h"
#include "doorsim/sim/pose_controller.h"
#include "doorsim/sim/rigid_body_world.h"

namespace doorsim {

inline constexpr int kObservationSize = 19;
inline constexpr int kActionSize = 9;

// The 19-component policy input: body velocities, hook-to-handle vector in
// the body frame, the body-to-handle rotation, and the shifted door angle.
struct Observation {
  Vec3 linear_velocity_B;
  Vec3 angular_velocity_B;
  Vec3 hook_to_handle_B;
  Mat3 rot_BD;
  double door_angle = 0.0;  // alpha - alpha_target

  // Layout: [v_B(3), omega_B(3), p_hd_B(3), R_BD row-major(9), door_angle].
  std::array<double, kObservationSize> Flatten() const;
  static Observation Unflatten(const std::array<double, kObservationSize>& x);
};

// Raw policy output and its decoded pose reference. raw = [Dp_ref, lambda0,
// lambda1]; the rotation comes from Gram-Schmidt on the two lambda vectors.
struct ActionCommand {
  std::array<double, kActionSize> raw{};
  Vec3 position_ref_W;
  Mat3 orientation_ref_WB;
  bool degenerate_rotation = false;  // lambdas were near zero or parallel
};

// The weighted reward terms. Every raw component is <= 0; total is the
// coefficient-weighted sum.
struct RewardBreakdown {
  double r_h_dist = 0.0;
  double r_h_in = 0.0;
  double r_att = 0.0;
  double r_d_dist = 0.0;
  double r_d_open = 0.0;
  double r_vel_lin = 0.0;
  double r_vel_ang = 0.0;
  double r_tau = 0.0;
  double total = 0.0;
};

// Scaling coefficients c0..c7.
inline constexpr double kCoeffHookDist = 1000.0;
inline constexpr double kCoeffHookIn = 1000.0;
inline constexpr double kCoeffAttitude = 1000.0;
inline constexpr double kCoeffDoorDist = 100.0;
inline constexpr double kCoeffDoorOpen = 2000.0;
inline constexpr double kCoeffVelLin = 10.0;
inline constexpr double kCoeffVelAng = 10.0;
inline constexpr double kCoeffWrench = 1.0;

// Uniform sampling ranges for episode starts. Positions are the hook pose in
// the handle frame D; rotations are RPY angles of R_DB.
struct RandomizationConfig {
  double handle_offset_range = 0.005;  // +- per axis, meters
  std::pair<double, double> init_position_x = {-0.4, 0.0};
  std::pair<double, double> init_position_y = {0.0, 0.4};
  std::pair<double, double> init_position_z = {-0.4, 0.4};
  double init_rpy_range = 0.2;     // +- per axis, rad
  double init_linvel_range = 0.1;  // +- per axis, m/s
  double init_angvel_range = 0.3;  // +- per axis, rad/s
};

struct SaturationConfig {
  bool enabled = true;
  double max_translation = 0.15;  // m
  double max_rotation = 0.2;      // rad
};

struct EpisodeConfig {
  double control_rate_hz = 50.0;
  int physics_substeps = 8;
  double max_episode_seconds = 15.0;
  double discount = 0.995;
  double delta_h_tresh = 0.06;  // m, hook-in-handle bonus radius
  double delta_d_tresh = 1.0;   // rad, door-open bonus threshold
  double alpha_target = 0.0;    // 0 to open, pi/2 to close
  double success_band = 0.1;    // fraction of pi/2
  SaturationConfig saturation;

  double ControlDt() const { return 1.0 / control_rate_hz; }
  double SubstepDt() const { return ControlDt() / physics_substeps; }
};

enum class Termination { kRunning, kSuccess, kTimeout, kBlowup };

// Fully randomized episode start per the randomization config: door closed,
// handle offset and hook pose/velocities sampled uniformly in frame D.
WorldState ResetRandomized(Rng& rng, const RandomizationConfig& rand,
                           const GeometryConfig& config);

// Same sampling but with the hook position in D and the initial door angle
// pinned (used by the evaluation sweeps and the door-closing runs).
WorldState ResetAt(Rng& rng, const Vec3& hook_position_D, double door_angle,
                   const RandomizationConfig& rand, const GeometryConfig& config);

Observation Observe(const WorldState& world, const EpisodeConfig& episode,
                    const GeometryConfig& config);

ActionCommand DecodeAction(const std::array<double, kActionSize>& raw,
                           const WorldState& world, const EpisodeConfig& episode,
                           const GeometryConfig& config);

inline PoseReference ToPoseReference(const ActionCommand& cmd) {
  return {cmd.position_ref_W, cmd.orientation_ref_WB};
}

// Reward for the current state under the given applied wrench (the task
// penalizes the feedback wrench, i.e. control effort above hover).
RewardBreakdown ComputeReward(const WorldState& world, const Wrench& applied,
                              const EpisodeConfig& episode,
                              const GeometryConfig& config);

// Hook-to-handle vector B p_hd = B p_h - B p_d used by both the observation
// and the reward.
Vec3 HookToHandleB(const WorldState& world, const GeometryConfig& config);

struct EnvStepResult {
  Observation observation;
  RewardBreakdown reward;
  bool done = false;
  Termination termination = Termination::kRunning;
  ActionCommand command;
  Wrench reward_wrench;  // feedback wrench the reward was computed from
};

// Trainer-facing surface: flat observations, scalar reward.
struct EnvStep {
  std::array<double, kObservationSize> observation{};
  double reward = 0.0;
  bool done = false;
  Termination termination = Termination::kRunning;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::array<double, kObservationSize> Reset() = 0;
  virtual EnvStep Step(const std::array<double, kActionSize>& action) = 0;
};

// One episodic environment instance. Each instance owns its random stream and
// is safe to run alongside others.
class TaskEnv : public Environment {
 public:
  TaskEnv(const GeometryConfig& geometry, const PoseGains& gains,
          const EpisodeConfig& episode, const RandomizationConfig& rand,
          uint64_t seed);

  std::array<double, kObservationSize> Reset() override;
  EnvStep Step(const std::array<double, kActionSize>& action) override;

  // Rich variants used by the evaluation harness.
  Observation ResetRich();
  Observation ResetAtRich(const Vec3& hook_position_D, double door_angle);
  EnvStepResult StepRich(const std::array<double, kActionSize>& action);

  const WorldState& world() const { return world_; }
  const EpisodeConfig& episode() const { return episode_; }
  const GeometryConfig& geometry() const { return geometry_; }
  void Reseed(uint64_t seed) { rng_ = Rng(seed); }

 private:
  GeometryConfig geometry_;
  PoseGains gains_;
  EpisodeConfig episode_;
  RandomizationConfig rand_;
  Rng rng_;
  WorldState world_;
  bool done_ = true;
};

}  // namespace doorsim

#endif  // DOORSIM_ENV_TASK_ENV_H_
