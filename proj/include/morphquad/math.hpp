#pragma once

#include <Eigen/Dense>

namespace morphquad {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// S(a) b = a x b
inline Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return s;
}

inline Vec3 vee(const Mat3& s) { return {s(2, 1), s(0, 2), s(1, 0)}; }

// Z-Y-X (yaw-pitch-roll) rotation, body to inertial.
inline Mat3 rotation_zyx(const Vec3& zeta) {
  return (Eigen::AngleAxisd(zeta.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(zeta.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(zeta.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

}  // namespace morphquad
