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

#include "doorsim/env/task_env.h"

#include <cmath>

namespace doorsim {

namespace {

constexpr double kGramSchmidtEps = 1e-8;
constexpr double kDoorRestRate = 0.05;  // rad/s, "door at rest" for success

Vec3 UniformBox(Rng& rng, double half_range) {
  return {rng.Uniform(-half_range, half_range), rng.Uniform(-half_range, half_range),
          rng.Uniform(-half_range, half_range)};
}

}  // namespace

std::array<double, kObservationSize> Observation::Flatten() const {
  std::array<double, kObservationSize> out;
  out[0] = linear_velocity_B.x;
  out[1] = linear_velocity_B.y;
  out[2] = linear_velocity_B.z;
  out[3] = angular_velocity_B.x;
  out[4] = angular_velocity_B.y;
  out[5] = angular_velocity_B.z;
  out[6] = hook_to_handle_B.x;
  out[7] = hook_to_handle_B.y;
  out[8] = hook_to_handle_B.z;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) out[9 + 3 * i + j] = rot_BD.m[i][j];
  out[18] = door_angle;
  return out;
}

Observation Observation::Unflatten(const std::array<double, kObservationSize>& x) {
  Observation obs;
  obs.linear_velocity_B = {x[0], x[1], x[2]};
  obs.angular_velocity_B = {x[3], x[4], x[5]};
  obs.hook_to_handle_B = {x[6], x[7], x[8]};
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) obs.rot_BD.m[i][j] = x[9 + 3 * i + j];
  obs.door_angle = x[18];
  return obs;
}

WorldState ResetAt(Rng& rng, const Vec3& hook_position_D, double door_angle,
                   const RandomizationConfig& rand, const GeometryConfig& config) {
  WorldState world;
  world.time = 0.0;
  world.door.angle = door_angle;
  world.door.angular_rate = 0.0;
  world.door.handle_offset_D = UniformBox(rng, rand.handle_offset_range);

  Vec3 rpy = UniformBox(rng, rand.init_rpy_range);
  Mat3 rot_DB = FromRpy(rpy.x, rpy.y, rpy.z);
  Mat3 rot_WD = HandleFrameRotation(door_angle, config);
  world.robot.orientation_WB = rot_WD * rot_DB;

  Vec3 hook_W = HandleFramePosition(world.door, config) + rot_WD * hook_position_D;
  world.robot.position_W = hook_W - world.robot.orientation_WB * config.hook_offset_B;

  world.robot.linear_velocity_B = UniformBox(rng, rand.init_linvel_range);
  world.robot.angular_velocity_B = UniformBox(rng, rand.init_angvel_range);
  return world;
}

WorldState ResetRandomized(Rng& rng, const RandomizationConfig& rand,
                           const GeometryConfig& config) {
  // Draw in a fixed order so seeds stay comparable: handle offset, hook
  // position, attitude, velocities.
  Vec3 handle_offset = UniformBox(rng, rand.handle_offset_range);
  Vec3 hook_pos_D{rng.Uniform(rand.init_position_x.first, rand.init_position_x.second),
                  rng.Uniform(rand.init_position_y.first, rand.init_position_y.second),
                  rng.Uniform(rand.init_position_z.first, rand.init_position_z.second)};

  WorldState world;
  world.time = 0.0;
  world.door.angle = M_PI / 2.0;  // start closed
  world.door.angular_rate = 0.0;
  world.door.handle_offset_D = handle_offset;

  Vec3 rpy = UniformBox(rng, rand.init_rpy_range);
  Mat3 rot_DB = FromRpy(rpy.x, rpy.y, rpy.z);
  Mat3 rot_WD = HandleFrameRotation(world.door.angle, config);
  world.robot.orientation_WB = rot_WD * rot_DB;

  Vec3 hook_W = HandleFramePosition(world.door, config) + rot_WD * hook_pos_D;
  world.robot.position_W = hook_W - world.robot.orientation_WB * config.hook_offset_B;

  world.robot.linear_velocity_B = UniformBox(rng, rand.init_linvel_range);
  world.robot.angular_velocity_B = UniformBox(rng, rand.init_angvel_range);
  return world;
}

Vec3 HookToHandleB(const WorldState& world, const GeometryConfig& config) {
  Vec3 handle_W = HandleFramePosition(world.door, config);
  Vec3 handle_B =
      world.robot.orientation_WB.TransposeTimes(handle_W - world.robot.position_W);
  return config.hook_offset_B - handle_B;
}

Observation Observe(const WorldState& world, const EpisodeConfig& episode,
                    const GeometryConfig& config) {
  Observation obs;
  obs.linear_velocity_B = world.robot.linear_velocity_B;
  obs.angular_velocity_B = world.robot.angular_velocity_B;
  obs.hook_to_handle_B = HookToHandleB(world, config);
  Mat3 rot_WD = HandleFrameRotation(world.door.angle, config);
  obs.rot_BD = world.robot.orientation_WB.Transpose() * rot_WD;
  obs.door_angle = world.door.angle - episode.alpha_target;
  return obs;
}

ActionCommand DecodeAction(const std::array<double, kActionSize>& raw,
                           const WorldState& world, const EpisodeConfig& episode,
                           const GeometryConfig& config) {
  ActionCommand cmd;
  cmd.raw = raw;

  Vec3 dpos{raw[0], raw[1], raw[2]};
  Vec3 lambda0{raw[3], raw[4], raw[5]};
  Vec3 lambda1{raw[6], raw[7], raw[8]};

  // Gram-Schmidt on the two commanded axes; near-zero or near-parallel inputs
  // fall back to the identity correction instead of failing.
  Mat3 rot_ref_rel = Mat3::Identity();
  double n0 = Norm(lambda0);
  if (n0 > kGramSchmidtEps) {
    Vec3 e0 = lambda0 / n0;
    Vec3 resid = lambda1 - e0 * Dot(e0, lambda1);
    double n1 = Norm(resid);
    if (n1 > kGramSchmidtEps) {
      Vec3 e1 = resid / n1;
      rot_ref_rel = Mat3::FromColumns(e0, e1, Cross(e0, e1));
    } else {
      cmd.degenerate_rotation = true;
    }
  } else {
    cmd.degenerate_rotation = true;
  }

  const SaturationConfig& sat = episode.saturation;
  if (sat.enabled) {
    double dn = Norm(dpos);
    if (dn > sat.max_translation) dpos *= sat.max_translation / dn;
  }

  Mat3 rot_WD = HandleFrameRotation(world.door.angle, config);
  cmd.position_ref_W = world.robot.position_W + rot_WD * dpos;
  cmd.orientation_ref_WB = rot_WD * rot_ref_rel;

  if (sat.enabled) {
    Mat3 err = world.robot.orientation_WB.Transpose() * cmd.orientation_ref_WB;
    double angle = RotationAngle(err);
    if (angle > sat.max_rotation) {
      Vec3 axis;
      AxisAngle(err, &axis, &angle);
      cmd.orientation_ref_WB =
          world.robot.orientation_WB * ExpSo3(axis * sat.max_rotation);
    }
  }
  return cmd;
}

RewardBreakdown ComputeReward(const WorldState& world, const Wrench& applied,
                              const EpisodeConfig& episode,
                              const GeometryConfig& config) {
  RewardBreakdown r;

  double hook_dist = Norm(HookToHandleB(world, config));
  r.r_h_dist = -hook_dist;
  r.r_h_in = hook_dist > episode.delta_h_tresh ? -1.0 : 0.0;

  Mat3 rot_BD = world.robot.orientation_WB.Transpose() *
                HandleFrameRotation(world.door.angle, config);
  double cos_theta = 0.5 * (rot_BD.Trace() - 1.0);
  r.r_att = -std::acos(std::fmin(1.0, std::fmax(-1.0, cos_theta)));

  double door_err = std::fabs(world.door.angle - episode.alpha_target);
  r.r_d_dist = -door_err;
  r.r_d_open = door_err > episode.delta_d_tresh ? -1.0 : 0.0;

  r.r_vel_lin = -SquaredNorm(world.robot.linear_velocity_B);
  r.r_vel_ang = -SquaredNorm(world.robot.angular_velocity_B);
  r.r_tau = -(SquaredNorm(applied.force_B) + SquaredNorm(applied.torque_B));

  r.total = kCoeffHookDist * r.r_h_dist + kCoeffHookIn * r.r_h_in +
            kCoeffAttitude * r.r_att + kCoeffDoorDist * r.r_d_dist +
            kCoeffDoorOpen * r.r_d_open + kCoeffVelLin * r.r_vel_lin +
            kCoeffVelAng * r.r_vel_ang + kCoeffWrench * r.r_tau;
  return r;
}

TaskEnv::TaskEnv(const GeometryConfig& geometry, const PoseGains& gains,
                 const EpisodeConfig& episode, const RandomizationConfig& rand,
                 uint64_t seed)
    : geometry_(geometry), gains_(gains), episode_(episode), rand_(rand), rng_(seed) {}

Observation TaskEnv::ResetRich() {
  world_ = ResetRandomized(rng_, rand_, geometry_);
  done_ = false;
  return Observe(world_, episode_, geometry_);
}

Observation TaskEnv::ResetAtRich(const Vec3& hook_position_D, double door_angle) {
  world_ = ResetAt(rng_, hook_position_D, door_angle, rand_, geometry_);
  done_ = false;
  return Observe(world_, episode_, geometry_);
}

std::array<double, kObservationSize> TaskEnv::Reset() {
  return ResetRich().Flatten();
}

EnvStepResult TaskEnv::StepRich(const std::array<double, kActionSize>& action) {
  EnvStepResult out;
  out.command = DecodeAction(action, world_, episode_, geometry_);
  PoseReference ref = ToPoseReference(out.command);

  Wrench feedback;
  bool blew_up = false;
  for (int s = 0; s < episode_.physics_substeps; s++) {
    Wrench total = ComputeWrench(world_.robot, ref, gains_, geometry_);
    feedback = FeedbackWrench(total, world_.robot.orientation_WB, geometry_);
    try {
      world_ = StepWorld(world_, total, geometry_, episode_.SubstepDt());
    } catch (const NumericalError&) {
      blew_up = true;
      break;
    }
  }

  out.observation = Observe(world_, episode_, geometry_);
  out.reward_wrench = feedback;
  out.reward = ComputeReward(world_, feedback, episode_, geometry_);

  double door_err = std::fabs(world_.door.angle - episode_.alpha_target);
  bool success = door_err <= episode_.success_band * (M_PI / 2.0) &&
                 std::fabs(world_.door.angular_rate) < kDoorRestRate;
  if (blew_up) {
    out.termination = Termination::kBlowup;
  } else if (success) {
    out.termination = Termination::kSuccess;
  } else if (world_.time >= episode_.max_episode_seconds - 1e-9) {
    out.termination = Termination::kTimeout;
  } else {
    out.termination = Termination::kRunning;
  }
  out.done = out.termination != Termination::kRunning;
  done_ = out.done;
  return out;
}

EnvStep TaskEnv::Step(const std::array<double, kActionSize>& action) {
  EnvStepResult rich = StepRich(action);
  return {rich.observation.Flatten(), rich.reward.total, rich.done, rich.termination};
}

}  // namespace doorsim
