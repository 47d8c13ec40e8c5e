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

#ifndef DOORSIM_SIM_POSE_CONTROLLER_H_
#define DOORSIM_SIM_POSE_CONTROLLER_H_

#include "doorsim/geometry.h"
#include "doorsim/sim/rigid_body_world.h"

namespace doorsim {

struct PoseReference {
  Vec3 position_W_ref;
  Mat3 orientation_WB_ref;
};

struct PoseGains {
  double kp_pos = 40.0;   // N/m
  double kd_pos = 12.0;   // N s/m
  double kp_rot = 8.0;    // N m/rad
  double kd_rot = 2.0;    // N m s/rad
  double force_limit = 30.0;   // N, elementwise clamp on the feedback force
  double torque_limit = 10.0;  // N m, elementwise clamp on the feedback torque
};

// Geometric attitude error e_R = 1/2 vee(R_ref^T R - R^T R_ref). Zero iff
// R == R_ref away from the 180-degree singularity; odd under swapping the
// arguments.
Vec3 AttitudeError(const Mat3& orientation_WB, const Mat3& orientation_WB_ref);

// PD pose controller with gravity feedforward. The PD feedback wrench is
// clamped elementwise to the configured limits before the gravity
// compensation is added, so the limits bound control effort without starving
// hover thrust.
Wrench ComputeWrench(const RobotState& robot, const PoseReference& ref,
                     const PoseGains& gains, const GeometryConfig& config);

// The feedback share of a controller wrench, i.e. the output minus gravity
// compensation. This is what the task reward penalizes.
Wrench FeedbackWrench(const Wrench& total, const Mat3& orientation_WB,
                      const GeometryConfig& config);

}  // namespace doorsim

#endif  // DOORSIM_SIM_POSE_CONTROLLER_H_
