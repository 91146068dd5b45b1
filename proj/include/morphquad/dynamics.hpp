#pragma once

#include "morphquad/math.hpp"
#include "morphquad/morphology.hpp"

namespace morphquad {

inline constexpr double kGravity = 9.81;
// Attitudes with |theta| >= pi/2 - kGimbalMargin are rejected.
inline constexpr double kGimbalMargin = 1e-3;

/// Rigid-body state in the inertial frame (z up). Euler angles are Z-Y-X.
struct RigidBodyState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 zeta = Vec3::Zero();  // (phi, theta, psi)
  Vec3 zeta_dot = Vec3::Zero();

  bool finite() const { return p.allFinite() && v.allFinite() && zeta.allFinite() && zeta_dot.allFinite(); }
};

/// Mass properties and rotor constants seen by the plant. `g` is the gravity
/// magnitude; the gravity force is -m g z_hat.
struct PlantParams {
  double m = 0.805;
  double g = kGravity;
  Vec3 J = Vec3(5e-3, 5e-3, 1e-2);
  double k_f = 8.0e-6;
  double k_m = 1.2e-7;
  double w_max = 1200.0;

  double max_rotor_thrust() const { return k_f * w_max * w_max; }
  void validate() const;
};

struct DisturbanceSample {
  Vec3 f_d = Vec3::Zero();      // inertial frame force
  Vec3 tau_d_b = Vec3::Zero();  // body frame torque
};

void check_attitude(const Vec3& zeta);

/// T(zeta) with omega_body = T zeta_dot.
Mat3 euler_rate_matrix(const Vec3& zeta);
/// dT/dt along zeta_dot.
Mat3 euler_rate_matrix_dot(const Vec3& zeta, const Vec3& zeta_dot);

struct InertiaCoriolis {
  Mat3 B;
  Mat3 C;
};

/// B = T' J T and C = T' J Tdot - T' S(J T zeta_dot) T, so that
/// B zeta_ddot + C zeta_dot = T' tau_b reproduces J w_dot + w x J w = tau_b
/// and Bdot - 2C is skew-symmetric.
InertiaCoriolis b_and_c_matrices(const Vec3& zeta, const Vec3& zeta_dot, const Vec3& J);

/// One RK4 step of m p_ddot + m g z_hat = f + f_d and
/// B zeta_ddot + C zeta_dot = tau + T' tau_d_b. `f` is held constant in the
/// inertial frame and `tau` in Euler coordinates over the step; the
/// disturbance torque is mapped at every stage.
RigidBodyState step_dynamics(const RigidBodyState& state, const PlantParams& params, const Vec3& f,
                             const Vec3& tau, const DisturbanceSample& d, double dt);

/// Same plant written with body rates, J w_dot + w x J w = tau_b + tau_d_b.
struct BodyRateState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 zeta = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
};

BodyRateState step_body_dynamics(const BodyRateState& state, const PlantParams& params, const Vec3& f,
                                 const Vec3& tau_b, const DisturbanceSample& d, double dt);

/// Rows: collective thrust, roll, pitch and yaw torque (body frame). Columns:
/// rotor thrusts in arm order. Spin directions alternate, +1 for even arms.
Mat4 allocation_matrix(double alpha, const MorphGeometry& geom, const PlantParams& params);

struct ClampedThrusts {
  Vec4 thrusts;
  bool saturated = false;
};

ClampedThrusts apply_rotor_limits(const Vec4& thrusts, const PlantParams& params);

}  // namespace morphquad
