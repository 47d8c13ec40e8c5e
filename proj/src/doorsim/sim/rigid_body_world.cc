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

#include "doorsim/sim/rigid_body_world.h"

#include <algorithm>
#include <cmath>

namespace doorsim {

namespace {

constexpr double kDoorClosedAngle = M_PI / 2.0;

double Clamp01(double v) { return std::fmin(1.0, std::fmax(0.0, v)); }

void ValidateDt(double dt) {
  if (!(dt > 0.0) || dt > 0.01) {
    throw std::invalid_argument("integration dt must be in (0, 0.01]");
  }
}

}  // namespace

CapsuleDistanceResult CapsuleCapsuleDistance(const Capsule& ca, const Capsule& cb) {
  const Vec3 d1 = ca.p1 - ca.p0;
  const Vec3 d2 = cb.p1 - cb.p0;
  const Vec3 r = ca.p0 - cb.p0;
  const double a = Dot(d1, d1);
  const double e = Dot(d2, d2);
  const double f = Dot(d2, r);

  double s = 0.0, t = 0.0;
  if (a <= 1e-24 && e <= 1e-24) {
    // Both segments degenerate to points.
  } else if (a <= 1e-24) {
    t = Clamp01(f / e);
  } else {
    const double c = Dot(d1, r);
    if (e <= 1e-24) {
      s = Clamp01(-c / a);
    } else {
      const double b = Dot(d1, d2);
      const double denom = a * e - b * b;
      if (denom > 1e-12 * a * e) {
        s = Clamp01((b * f - c * e) / denom);
      } else {
        // Parallel axes. If the projections overlap, take the midpoint of the
        // overlap so coincident bars resolve symmetrically.
        double t0 = Dot(cb.p0 - ca.p0, d1) / a;
        double t1 = Dot(cb.p1 - ca.p0, d1) / a;
        double lo = std::fmin(t0, t1), hi = std::fmax(t0, t1);
        double olo = std::fmax(0.0, lo), ohi = std::fmin(1.0, hi);
        if (olo <= ohi) {
          s = 0.5 * (olo + ohi);
        } else {
          s = Clamp01(lo > 1.0 ? 1.0 : 0.0);
        }
      }
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = Clamp01(-c / a);
      } else if (t > 1.0) {
        t = 1.0;
        s = Clamp01((b - c) / a);
      }
    }
  }

  CapsuleDistanceResult out;
  out.point_a = ca.p0 + d1 * s;
  out.point_b = cb.p0 + d2 * t;
  Vec3 sep = out.point_a - out.point_b;
  double axis_dist = Norm(sep);
  if (axis_dist > 1e-12) {
    out.normal = sep / axis_dist;
  } else {
    // Coincident closest points: any perpendicular works, pick one
    // deterministically.
    Vec3 axis = a > 1e-24 ? Normalized(d1) : Vec3{1.0, 0.0, 0.0};
    Vec3 n = Cross(axis, Vec3{0.0, 0.0, 1.0});
    if (SquaredNorm(n) < 1e-12) n = Cross(axis, Vec3{0.0, 1.0, 0.0});
    out.normal = Normalized(n);
  }
  out.distance = axis_dist - ca.radius - cb.radius;
  return out;
}

Wrench GravityWrench(const Mat3& orientation_WB, const GeometryConfig& config) {
  Vec3 gravity_W{0.0, 0.0, -config.robot_mass * kGravity};
  return {orientation_WB.TransposeTimes(gravity_W), Vec3{}};
}

Wrench CoriolisWrench(const Vec3& angular_velocity_B, const GeometryConfig& config) {
  Vec3 j_omega = config.RobotInertiaB() * angular_velocity_B;
  return {Vec3{}, Cross(angular_velocity_B, j_omega)};
}

RobotState StepFreeBody(const RobotState& robot, const Wrench& applied,
                        const GeometryConfig& config, double dt) {
  ValidateDt(dt);
  const Mat3& rot = robot.orientation_WB;
  const Mat3 inertia = config.RobotInertiaB();
  const Mat3 inertia_inv = Inverse(inertia);

  // Linear part in the world frame; the gravity term cancels the applied
  // wrench exactly at hover.
  Vec3 force_B = applied.force_B + GravityWrench(rot, config).force_B;
  Vec3 accel_W = (rot * force_B) / config.robot_mass;

  // Angular part in the body frame with the gyroscopic torque.
  Vec3 torque_B = applied.torque_B - CoriolisWrench(robot.angular_velocity_B, config).torque_B;
  Vec3 omega_dot_B = inertia_inv * torque_B;

  RobotState next;
  Vec3 vel_old_W = rot * robot.linear_velocity_B;
  Vec3 vel_W = vel_old_W + accel_W * dt;
  next.angular_velocity_B = robot.angular_velocity_B + omega_dot_B * dt;
  // Velocity-Verlet drift: the midpoint velocity makes constant-acceleration
  // trajectories exact while keeping the kick-drift (symplectic) structure.
  next.position_W = robot.position_W + (vel_old_W + vel_W) * (0.5 * dt);
  next.orientation_WB = Orthonormalized(rot * ExpSo3(next.angular_velocity_B * dt));
  next.linear_velocity_B = next.orientation_WB.TransposeTimes(vel_W);

  if (!IsFinite(next.position_W) || !IsFinite(next.linear_velocity_B) ||
      !IsFinite(next.angular_velocity_B) || !IsFinite(next.orientation_WB)) {
    throw NumericalError("free body state became non-finite");
  }
  return next;
}

DoorState StepDoor(const DoorState& door, double hinge_torque,
                   const GeometryConfig& config, double dt) {
  ValidateDt(dt);
  DoorState next = door;
  double accel = (hinge_torque - config.door_viscous_damping * door.angular_rate) /
                 config.door_inertia_about_hinge;
  next.angular_rate = door.angular_rate + accel * dt;
  next.angle = door.angle + 0.5 * (door.angular_rate + next.angular_rate) * dt;
  if (next.angle <= 0.0) {
    next.angle = 0.0;
    if (next.angular_rate < 0.0) next.angular_rate = 0.0;
  } else if (next.angle >= kDoorClosedAngle) {
    next.angle = kDoorClosedAngle;
    if (next.angular_rate > 0.0) next.angular_rate = 0.0;
  }
  if (!std::isfinite(next.angle) || !std::isfinite(next.angular_rate)) {
    throw NumericalError("door state became non-finite");
  }
  return next;
}

Mat3 DoorBodyRotation(double angle, const GeometryConfig& config) {
  Mat3 base = FromRpy(config.door_base_rpy.x, config.door_base_rpy.y,
                      config.door_base_rpy.z);
  return base * ExpSo3(Normalized(config.hinge_axis_W) * (angle - kDoorClosedAngle));
}

Vec3 HingeAxisW(const GeometryConfig& config) {
  Mat3 base = FromRpy(config.door_base_rpy.x, config.door_base_rpy.y,
                      config.door_base_rpy.z);
  return base * Normalized(config.hinge_axis_W);
}

namespace {

// D axes expressed in door-body coordinates: x_D into the door, z_D along the
// hinge, y_D completing the right-handed frame.
Mat3 DoorBodyToHandleAxes() {
  return Mat3::FromColumns({-1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, {0.0, 0.0, 1.0});
}

// Handle origin in door-body coordinates, before the randomized offset.
Vec3 NominalHandleLocal(const GeometryConfig& config) {
  return config.handle_center_on_door + Vec3{config.handle_standoff, 0.0, 0.0};
}

}  // namespace

Mat3 HandleFrameRotation(double angle, const GeometryConfig& config) {
  return DoorBodyRotation(angle, config) * DoorBodyToHandleAxes();
}

Vec3 HandleFramePosition(const DoorState& door, const GeometryConfig& config) {
  Mat3 door_rot = DoorBodyRotation(door.angle, config);
  Vec3 local = NominalHandleLocal(config) + DoorBodyToHandleAxes() * door.handle_offset_D;
  return config.hinge_position_W + door_rot * local;
}

Vec3 HookPositionW(const RobotState& robot, const GeometryConfig& config) {
  return robot.position_W + robot.orientation_WB * config.hook_offset_B;
}

Capsule HookCapsuleW(const RobotState& robot, const GeometryConfig& config) {
  Vec3 center = HookPositionW(robot, config);
  Vec3 axis = robot.orientation_WB * Normalized(config.hook_capsule_axis_B);
  Vec3 half = axis * config.hook_capsule_half_length;
  return {center - half, center + half, config.hook_capsule_radius};
}

std::array<Capsule, 4> HandleCapsulesW(const DoorState& door,
                                       const GeometryConfig& config) {
  Mat3 rot_WD = HandleFrameRotation(door.angle, config);
  Vec3 origin = HandleFramePosition(door, config);
  double hw = 0.5 * config.handle_rect_width;   // along y_D
  double hh = 0.5 * config.handle_rect_height;  // along x_D
  double r = config.handle_bar_radius;
  auto world = [&](double x, double y) { return origin + rot_WD * Vec3{x, y, 0.0}; };
  return {
      Capsule{world(-hh, -hw), world(-hh, hw), r},  // front bar (robot side)
      Capsule{world(hh, -hw), world(hh, hw), r},    // rear bar (door side)
      Capsule{world(-hh, -hw), world(hh, -hw), r},  // side post
      Capsule{world(-hh, hw), world(hh, hw), r},    // side post
  };
}

ContactResult ContactForces(const WorldState& world, const GeometryConfig& config) {
  ContactResult out;
  Capsule hook = HookCapsuleW(world.robot, config);
  std::array<Capsule, 4> bars = HandleCapsulesW(world.door, config);

  const Mat3& rot = world.robot.orientation_WB;
  Vec3 robot_vel_W = rot * world.robot.linear_velocity_B;
  Vec3 robot_omega_W = rot * world.robot.angular_velocity_B;
  Vec3 hinge_axis = HingeAxisW(config);
  Vec3 door_omega_W = hinge_axis * world.door.angular_rate;

  for (const Capsule& bar : bars) {
    CapsuleDistanceResult res = CapsuleCapsuleDistance(hook, bar);
    if (res.distance >= 0.0) continue;

    double penetration = -res.distance;
    const Vec3& n = res.normal;  // bar -> hook
    Vec3 contact = (res.point_a - n * hook.radius + res.point_b + n * bar.radius) * 0.5;

    Vec3 v_hook = robot_vel_W + Cross(robot_omega_W, contact - world.robot.position_W);
    Vec3 v_door = Cross(door_omega_W, contact - config.hinge_position_W);
    Vec3 v_rel = v_hook - v_door;
    double v_n = Dot(v_rel, n);  // positive while separating

    double normal_mag = std::fmax(
        0.0, config.contact_stiffness * penetration - config.contact_damping * v_n);
    Vec3 force = n * normal_mag;

    Vec3 v_t = v_rel - n * v_n;
    double v_t_norm = Norm(v_t);
    if (v_t_norm > 1e-9) {
      double friction_mag = std::fmin(config.friction_coefficient * normal_mag,
                                      config.contact_damping * v_t_norm);
      force -= (v_t / v_t_norm) * friction_mag;
    }

    out.wrench_on_robot_B.force_B += rot.TransposeTimes(force);
    out.wrench_on_robot_B.torque_B +=
        rot.TransposeTimes(Cross(contact - world.robot.position_W, force));
    out.force_on_robot_W += force;
    out.force_on_door_W -= force;
    out.hinge_torque += Dot(hinge_axis, Cross(contact - config.hinge_position_W, -force));
    out.active_pairs++;
  }
  return out;
}

WorldState StepWorld(const WorldState& world, const Wrench& applied,
                     const GeometryConfig& config, double dt) {
  ContactResult contact = ContactForces(world, config);
  WorldState next;
  next.robot = StepFreeBody(world.robot, applied + contact.wrench_on_robot_B, config, dt);
  next.door = StepDoor(world.door, contact.hinge_torque, config, dt);
  next.time = world.time + dt;
  return next;
}

bool IsFinite(const WorldState& world) {
  return IsFinite(world.robot.position_W) && IsFinite(world.robot.orientation_WB) &&
         IsFinite(world.robot.linear_velocity_B) &&
         IsFinite(world.robot.angular_velocity_B) && std::isfinite(world.door.angle) &&
         std::isfinite(world.door.angular_rate) && IsFinite(world.door.handle_offset_D) &&
         std::isfinite(world.time);
}

}  // namespace doorsim
