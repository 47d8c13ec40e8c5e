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

#include "doorsim/sim/pose_controller.h"

#include <cmath>

namespace doorsim {

namespace {

Vec3 ClampElementwise(const Vec3& v, double limit) {
  return {std::fmin(limit, std::fmax(-limit, v.x)),
          std::fmin(limit, std::fmax(-limit, v.y)),
          std::fmin(limit, std::fmax(-limit, v.z))};
}

}  // namespace

Vec3 AttitudeError(const Mat3& orientation_WB, const Mat3& orientation_WB_ref) {
  Mat3 a = orientation_WB_ref.Transpose() * orientation_WB;
  return Vee(a - a.Transpose()) * 0.5;
}

Wrench ComputeWrench(const RobotState& robot, const PoseReference& ref,
                     const PoseGains& gains, const GeometryConfig& config) {
  const Mat3& rot = robot.orientation_WB;

  Vec3 pos_error_W = ref.position_W_ref - robot.position_W;
  Vec3 force_B = rot.TransposeTimes(pos_error_W * gains.kp_pos) -
                 robot.linear_velocity_B * gains.kd_pos;

  Vec3 e_rot = AttitudeError(rot, ref.orientation_WB_ref);
  Vec3 torque_B = -e_rot * gains.kp_rot - robot.angular_velocity_B * gains.kd_rot;

  Wrench out;
  out.force_B = ClampElementwise(force_B, gains.force_limit) -
                GravityWrench(rot, config).force_B;
  out.torque_B = ClampElementwise(torque_B, gains.torque_limit);
  return out;
}

Wrench FeedbackWrench(const Wrench& total, const Mat3& orientation_WB,
                      const GeometryConfig& config) {
  return {total.force_B + GravityWrench(orientation_WB, config).force_B,
          total.torque_B};
}

}  // namespace doorsim
