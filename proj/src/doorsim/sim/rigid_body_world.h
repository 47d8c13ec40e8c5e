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

#ifndef DOORSIM_SIM_RIGID_BODY_WORLD_H_
#define DOORSIM_SIM_RIGID_BODY_WORLD_H_

#include <array>
#include <stdexcept>

#include "doorsim/geometry.h"

namespace doorsim {

// Thrown when an integration step produces a non-finite state.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 6-DoF wrench-actuated body. Linear and angular velocities are stored in the
// body frame; position and orientation are world-frame.
struct RobotState {
  Vec3 position_W;
  Mat3 orientation_WB;
  Vec3 linear_velocity_B;
  Vec3 angular_velocity_B;
};

// Hinged door with a 1-DoF joint. angle runs over [0, pi/2]; by the task
// convention pi/2 is fully closed and 0 is fully open. handle_offset_D is the
// randomized displacement of the physical handle, expressed in handle-frame
// axes.
struct DoorState {
  double angle = M_PI / 2.0;
  double angular_rate = 0.0;
  Vec3 handle_offset_D;
};

struct WorldState {
  RobotState robot;
  DoorState door;
  double time = 0.0;
};

// Force and torque on the robot, both in the body frame.
struct Wrench {
  Vec3 force_B;
  Vec3 torque_B;

  Wrench operator+(const Wrench& o) const {
    return {force_B + o.force_B, torque_B + o.torque_B};
  }
};

// All physical parameters of the scene. The handle is a rectangle of four
// capsule bars lying in the x-y plane of the handle frame D, held standoff
// meters in front of the door plane; the hook is a single capsule on the
// robot. Frame D has +x pointing into the door, +z along the hinge axis, so
// the robot operates in the x < 0 half-space of D.
struct GeometryConfig {
  double robot_mass = 4.0;
  Vec3 robot_inertia_diag_B = {0.15, 0.15, 0.2};
  Vec3 hook_offset_B = {0.55, 0.0, 0.0};
  Vec3 hook_capsule_axis_B = {0.0, 0.0, 1.0};
  double hook_capsule_half_length = 0.05;
  double hook_capsule_radius = 0.015;
  double door_inertia_about_hinge = 0.35;
  double door_width = 0.4;
  // Hinge axis in the door's base frame (equals the world axis while
  // door_base_rpy is zero, the default).
  Vec3 hinge_axis_W = {0.0, 0.0, 1.0};
  Vec3 hinge_position_W = {0.0, 0.0, 0.0};
  // Rigid placement of the whole door assembly in the world.
  Vec3 door_base_rpy = {0.0, 0.0, 0.0};
  Vec3 handle_center_on_door = {0.0, 0.4, 0.0};
  double handle_rect_width = 0.16;   // extent along y_D
  double handle_rect_height = 0.10;  // extent along x_D (insertion depth)
  double handle_bar_radius = 0.01;
  double handle_standoff = 0.05;
  double door_viscous_damping = 0.5;
  double contact_stiffness = 5000.0;
  double contact_damping = 50.0;
  double friction_coefficient = 0.3;

  Mat3 RobotInertiaB() const { return Mat3::Diagonal(robot_inertia_diag_B); }
};

struct Capsule {
  Vec3 p0;
  Vec3 p1;
  double radius = 0.0;
};

// Closest points are on the segment axes; distance is between the capsule
// surfaces (negative means penetration). normal points from b toward a.
struct CapsuleDistanceResult {
  double distance = 0.0;
  Vec3 point_a;
  Vec3 point_b;
  Vec3 normal;
};

CapsuleDistanceResult CapsuleCapsuleDistance(const Capsule& a, const Capsule& b);

// Gravity wrench acting on the body (force points down in world frame, so
// hover thrust is its negation). Torque is zero: the body frame sits at the
// center of mass.
Wrench GravityWrench(const Mat3& orientation_WB, const GeometryConfig& config);

// Gyroscopic wrench: zero force, torque = omega x (J omega).
Wrench CoriolisWrench(const Vec3& angular_velocity_B, const GeometryConfig& config);

// One semi-implicit Euler step of the free body under the applied wrench plus
// gravity. Throws NumericalError if the result is non-finite.
RobotState StepFreeBody(const RobotState& robot, const Wrench& applied,
                        const GeometryConfig& config, double dt);

// One semi-implicit Euler step of the hinge coordinate, with hard stops at
// 0 and pi/2 that also zero the rate.
DoorState StepDoor(const DoorState& door, double hinge_torque,
                   const GeometryConfig& config, double dt);

struct ContactResult {
  Wrench wrench_on_robot_B;
  double hinge_torque = 0.0;
  // World-frame totals, kept for the reciprocity checks.
  Vec3 force_on_robot_W;
  Vec3 force_on_door_W;
  int active_pairs = 0;
};

// Penalty contact between the hook capsule and the four handle bars:
// spring-damper normal force, Coulomb-clipped viscous friction.
ContactResult ContactForces(const WorldState& world, const GeometryConfig& config);

// Contact, then robot, then door, all with the same dt.
WorldState StepWorld(const WorldState& world, const Wrench& applied,
                     const GeometryConfig& config, double dt);

// --- door / handle kinematics ---

// Rotation of the door body frame. At angle = pi/2 (closed) the door body
// coincides with its base frame: panel front normal +x, panel toward the
// handle +y.
Mat3 DoorBodyRotation(double angle, const GeometryConfig& config);

// Hinge axis expressed in the world frame.
Vec3 HingeAxisW(const GeometryConfig& config);

// Handle frame D: x into the door, z along the hinge axis.
Mat3 HandleFrameRotation(double angle, const GeometryConfig& config);

// Handle frame origin in world, including the randomized handle offset.
Vec3 HandleFramePosition(const DoorState& door, const GeometryConfig& config);

Vec3 HookPositionW(const RobotState& robot, const GeometryConfig& config);
Capsule HookCapsuleW(const RobotState& robot, const GeometryConfig& config);
std::array<Capsule, 4> HandleCapsulesW(const DoorState& door,
                                       const GeometryConfig& config);

bool IsFinite(const WorldState& world);

}  // namespace doorsim

#endif  // DOORSIM_SIM_RIGID_BODY_WORLD_H_
