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

#ifndef DOORSIM_GEOMETRY_H_
#define DOORSIM_GEOMETRY_H_

#include <array>
#include <cmath>

namespace doorsim {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double Dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

constexpr Vec3 Cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double SquaredNorm(const Vec3& v) { return Dot(v, v); }
inline double Norm(const Vec3& v) { return std::sqrt(Dot(v, v)); }

inline Vec3 Normalized(const Vec3& v) {
  double n = Norm(v);
  return n > 0.0 ? v / n : Vec3{0.0, 0.0, 0.0};
}

inline bool IsFinite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Row-major 3x3 matrix. Used both for rotations and inertia tensors.
struct Mat3 {
  double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  static Mat3 Identity() { return Mat3{}; }

  static Mat3 Zero() {
    Mat3 r;
    for (int i = 0; i < 3; i++)
      for (int j = 0; j < 3; j++) r.m[i][j] = 0.0;
    return r;
  }

  static Mat3 Diagonal(const Vec3& d) {
    Mat3 r = Zero();
    r.m[0][0] = d.x;
    r.m[1][1] = d.y;
    r.m[2][2] = d.z;
    return r;
  }

  static Mat3 FromColumns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    Mat3 r;
    for (int i = 0; i < 3; i++) {
      r.m[i][0] = c0[i];
      r.m[i][1] = c1[i];
      r.m[i][2] = c2[i];
    }
    return r;
  }

  Vec3 Column(int j) const { return {m[0][j], m[1][j], m[2][j]}; }
  Vec3 Row(int i) const { return {m[i][0], m[i][1], m[i][2]}; }

  Mat3 Transpose() const {
    Mat3 r;
    for (int i = 0; i < 3; i++)
      for (int j = 0; j < 3; j++) r.m[i][j] = m[j][i];
    return r;
  }

  double Trace() const { return m[0][0] + m[1][1] + m[2][2]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r = Zero();
    for (int i = 0; i < 3; i++)
      for (int k = 0; k < 3; k++) {
        double a = m[i][k];
        for (int j = 0; j < 3; j++) r.m[i][j] += a * o.m[k][j];
      }
    return r;
  }

  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; i++)
      for (int j = 0; j < 3; j++) r.m[i][j] = m[i][j] + o.m[i][j];
    return r;
  }

  Mat3 operator-(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; i++)
      for (int j = 0; j < 3; j++) r.m[i][j] = m[i][j] - o.m[i][j];
    return r;
  }

  Mat3 operator*(double s) const {
    Mat3 r;
    for (int i = 0; i < 3; i++)
      for (int j = 0; j < 3; j++) r.m[i][j] = m[i][j] * s;
    return r;
  }

  // Transpose-multiply, avoids materializing the transpose.
  Vec3 TransposeTimes(const Vec3& v) const {
    return {m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
            m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
            m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z};
  }
};

inline bool IsFinite(const Mat3& a) {
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++)
      if (!std::isfinite(a.m[i][j])) return false;
  return true;
}

inline Mat3 Hat(const Vec3& w) {
  Mat3 r = Mat3::Zero();
  r.m[0][1] = -w.z;
  r.m[0][2] = w.y;
  r.m[1][0] = w.z;
  r.m[1][2] = -w.x;
  r.m[2][0] = -w.y;
  r.m[2][1] = w.x;
  return r;
}

inline Vec3 Vee(const Mat3& a) { return {a.m[2][1], a.m[0][2], a.m[1][0]}; }

// Rodrigues formula for the rotation-vector exponential, with a series
// expansion near zero so the map stays smooth down to w = 0.
inline Mat3 ExpSo3(const Vec3& w) {
  double theta2 = SquaredNorm(w);
  double theta = std::sqrt(theta2);
  double a, b;  // sin(t)/t and (1-cos(t))/t^2
  if (theta < 1e-8) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  Mat3 k = Hat(w);
  return Mat3::Identity() + k * a + (k * k) * b;
}

inline Mat3 RotX(double t) {
  Mat3 r = Mat3::Identity();
  double c = std::cos(t), s = std::sin(t);
  r.m[1][1] = c;
  r.m[1][2] = -s;
  r.m[2][1] = s;
  r.m[2][2] = c;
  return r;
}

inline Mat3 RotY(double t) {
  Mat3 r = Mat3::Identity();
  double c = std::cos(t), s = std::sin(t);
  r.m[0][0] = c;
  r.m[0][2] = s;
  r.m[2][0] = -s;
  r.m[2][2] = c;
  return r;
}

inline Mat3 RotZ(double t) {
  Mat3 r = Mat3::Identity();
  double c = std::cos(t), s = std::sin(t);
  r.m[0][0] = c;
  r.m[0][1] = -s;
  r.m[1][0] = s;
  r.m[1][1] = c;
  return r;
}

// Roll-pitch-yaw (x, then y, then z) to rotation matrix.
inline Mat3 FromRpy(double roll, double pitch, double yaw) {
  return RotZ(yaw) * (RotY(pitch) * RotX(roll));
}

// Inverse of FromRpy (ZYX extraction; pitch in [-pi/2, pi/2]).
inline Vec3 ToRpy(const Mat3& r) {
  double pitch = std::asin(std::fmin(1.0, std::fmax(-1.0, -r.m[2][0])));
  double roll = std::atan2(r.m[2][1], r.m[2][2]);
  double yaw = std::atan2(r.m[1][0], r.m[0][0]);
  return {roll, pitch, yaw};
}

// Geodesic angle of a rotation matrix, in [0, pi].
inline double RotationAngle(const Mat3& r) {
  double c = 0.5 * (r.Trace() - 1.0);
  c = std::fmin(1.0, std::fmax(-1.0, c));
  return std::acos(c);
}

// Axis-angle decomposition, robust near 0 and pi.
inline void AxisAngle(const Mat3& r, Vec3* axis, double* angle) {
  *angle = RotationAngle(r);
  if (*angle < 1e-12) {
    *axis = {1.0, 0.0, 0.0};
    return;
  }
  if (*angle > M_PI - 1e-6) {
    // Near pi the skew part vanishes; recover the axis from R + I.
    Mat3 s = r + Mat3::Identity();
    int best = 0;
    for (int j = 1; j < 3; j++)
      if (s.m[j][j] > s.m[best][best]) best = j;
    Vec3 v = s.Column(best);
    *axis = Normalized(v);
    return;
  }
  *axis = Normalized(Vee(r - r.Transpose()) * 0.5);
}

// Project back onto SO(3) by Gram-Schmidt on the first two columns.
inline Mat3 Orthonormalized(const Mat3& r) {
  Vec3 c0 = Normalized(r.Column(0));
  Vec3 c1 = r.Column(1);
  c1 = Normalized(c1 - c0 * Dot(c0, c1));
  Vec3 c2 = Cross(c0, c1);
  return Mat3::FromColumns(c0, c1, c2);
}

inline double Determinant(const Mat3& a) {
  return a.m[0][0] * (a.m[1][1] * a.m[2][2] - a.m[1][2] * a.m[2][1]) -
         a.m[0][1] * (a.m[1][0] * a.m[2][2] - a.m[1][2] * a.m[2][0]) +
         a.m[0][2] * (a.m[1][0] * a.m[2][1] - a.m[1][1] * a.m[2][0]);
}

inline Mat3 Inverse(const Mat3& a) {
  double det = Determinant(a);
  Mat3 r;
  r.m[0][0] = (a.m[1][1] * a.m[2][2] - a.m[1][2] * a.m[2][1]) / det;
  r.m[0][1] = (a.m[0][2] * a.m[2][1] - a.m[0][1] * a.m[2][2]) / det;
  r.m[0][2] = (a.m[0][1] * a.m[1][2] - a.m[0][2] * a.m[1][1]) / det;
  r.m[1][0] = (a.m[1][2] * a.m[2][0] - a.m[1][0] * a.m[2][2]) / det;
  r.m[1][1] = (a.m[0][0] * a.m[2][2] - a.m[0][2] * a.m[2][0]) / det;
  r.m[1][2] = (a.m[0][2] * a.m[1][0] - a.m[0][0] * a.m[1][2]) / det;
  r.m[2][0] = (a.m[1][0] * a.m[2][1] - a.m[1][1] * a.m[2][0]) / det;
  r.m[2][1] = (a.m[0][1] * a.m[2][0] - a.m[0][0] * a.m[2][1]) / det;
  r.m[2][2] = (a.m[0][0] * a.m[1][1] - a.m[0][1] * a.m[1][0]) / det;
  return r;
}

inline double MaxAbsEntry(const Mat3& a) {
  double r = 0.0;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) r = std::fmax(r, std::fabs(a.m[i][j]));
  return r;
}

// ||R^T R - I||_max, the orthonormality defect used by the integrator tests.
inline double OrthonormalityDefect(const Mat3& r) {
  return MaxAbsEntry(r.Transpose() * r - Mat3::Identity());
}

constexpr double kGravity = 9.81;

}  // namespace doorsim

#endif  // DOORSIM_GEOMETRY_H_
