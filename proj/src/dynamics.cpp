#include "morphquad/dynamics.hpp"

#include <cmath>
#include <string>

#include "morphquad/errors.hpp"

namespace morphquad {

namespace {

struct Derivative {
  Vec3 p;
  Vec3 v;
  Vec3 zeta;
  Vec3 zeta_dot;
};

RigidBodyState advance(const RigidBodyState& s, const Derivative& k, double h) {
  RigidBodyState out;
  out.p = s.p + h * k.p;
  out.v = s.v + h * k.v;
  out.zeta = s.zeta + h * k.zeta;
  out.zeta_dot = s.zeta_dot + h * k.zeta_dot;
  return out;
}

Derivative euler_form_rhs(const RigidBodyState& s, const PlantParams& params, const Vec3& f, const Vec3& tau,
                          const DisturbanceSample& d) {
  const Mat3 T = euler_rate_matrix(s.zeta);
  const auto [B, C] = b_and_c_matrices(s.zeta, s.zeta_dot, params.J);
  const Vec3 generalized = tau + T.transpose() * d.tau_d_b - C * s.zeta_dot;
  Derivative k;
  k.p = s.v;
  k.v = (f + d.f_d) / params.m - params.g * Vec3::UnitZ();
  k.zeta = s.zeta_dot;
  k.zeta_dot = B.ldlt().solve(generalized);
  return k;
}

}  // namespace

void PlantParams::validate() const {
  if (!(m > 0.0)) throw DomainError("plant mass must be positive");
  if (!(J.minCoeff() > 0.0)) throw DomainError("plant inertia must be positive");
  if (!(k_f > 0.0 && k_m > 0.0 && w_max > 0.0)) throw DomainError("rotor constants must be positive");
}

void check_attitude(const Vec3& zeta) {
  if (!zeta.allFinite()) {
    throw SingularityError("non-finite attitude");
  }
  if (std::abs(zeta.y()) >= kPi / 2.0 - kGimbalMargin) {
    throw SingularityError("pitch " + std::to_string(zeta.y()) + " rad at Euler singularity");
  }
}

Mat3 euler_rate_matrix(const Vec3& zeta) {
  check_attitude(zeta);
  const double sphi = std::sin(zeta.x()), cphi = std::cos(zeta.x());
  const double sth = std::sin(zeta.y()), cth = std::cos(zeta.y());
  Mat3 T;
  T << 1.0, 0.0, -sth,
       0.0, cphi, sphi * cth,
       0.0, -sphi, cphi * cth;
  return T;
}

Mat3 euler_rate_matrix_dot(const Vec3& zeta, const Vec3& zeta_dot) {
  check_attitude(zeta);
  const double sphi = std::sin(zeta.x()), cphi = std::cos(zeta.x());
  const double sth = std::sin(zeta.y()), cth = std::cos(zeta.y());
  const double dphi = zeta_dot.x(), dth = zeta_dot.y();
  Mat3 Td;
  Td << 0.0, 0.0, -cth * dth,
        0.0, -sphi * dphi, cphi * cth * dphi - sphi * sth * dth,
        0.0, -cphi * dphi, -sphi * cth * dphi - cphi * sth * dth;
  return Td;
}

InertiaCoriolis b_and_c_matrices(const Vec3& zeta, const Vec3& zeta_dot, const Vec3& J) {
  const Mat3 T = euler_rate_matrix(zeta);
  const Mat3 Td = euler_rate_matrix_dot(zeta, zeta_dot);
  const Mat3 Jm = J.asDiagonal();
  const Vec3 h = Jm * (T * zeta_dot);  // body angular momentum
  InertiaCoriolis out;
  out.B = T.transpose() * Jm * T;
  out.C = T.transpose() * Jm * Td - T.transpose() * skew(h) * T;
  return out;
}

RigidBodyState step_dynamics(const RigidBodyState& state, const PlantParams& params, const Vec3& f,
                             const Vec3& tau, const DisturbanceSample& d, double dt) {
  if (!(dt > 0.0 && dt <= 0.01)) {
    throw DomainError("plant step must lie in (0, 0.01] s");
  }
  if (!state.finite()) {
    throw DomainError("non-finite plant state");
  }
  const Derivative k1 = euler_form_rhs(state, params, f, tau, d);
  const Derivative k2 = euler_form_rhs(advance(state, k1, dt / 2.0), params, f, tau, d);
  const Derivative k3 = euler_form_rhs(advance(state, k2, dt / 2.0), params, f, tau, d);
  const Derivative k4 = euler_form_rhs(advance(state, k3, dt), params, f, tau, d);

  RigidBodyState out;
  out.p = state.p + dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
  out.v = state.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  out.zeta = state.zeta + dt / 6.0 * (k1.zeta + 2.0 * k2.zeta + 2.0 * k3.zeta + k4.zeta);
  out.zeta_dot = state.zeta_dot + dt / 6.0 * (k1.zeta_dot + 2.0 * k2.zeta_dot + 2.0 * k3.zeta_dot + k4.zeta_dot);
  if (!out.finite()) {
    throw DomainError("plant step produced a non-finite state");
  }
  check_attitude(out.zeta);
  return out;
}

BodyRateState step_body_dynamics(const BodyRateState& state, const PlantParams& params, const Vec3& f,
                                 const Vec3& tau_b, const DisturbanceSample& d, double dt) {
  struct D {
    Vec3 p, v, zeta, omega;
  };
  const Mat3 Jm = params.J.asDiagonal();
  auto rhs = [&](const BodyRateState& s) {
    D k;
    k.p = s.v;
    k.v = (f + d.f_d) / params.m - params.g * Vec3::UnitZ();
    k.zeta = euler_rate_matrix(s.zeta).inverse() * s.omega;
    k.omega = Jm.inverse() * (tau_b + d.tau_d_b - s.omega.cross(Jm * s.omega));
    return k;
  };
  auto adv = [](const BodyRateState& s, const D& k, double h) {
    return BodyRateState{s.p + h * k.p, s.v + h * k.v, s.zeta + h * k.zeta, s.omega + h * k.omega};
  };
  const D k1 = rhs(state);
  const D k2 = rhs(adv(state, k1, dt / 2.0));
  const D k3 = rhs(adv(state, k2, dt / 2.0));
  const D k4 = rhs(adv(state, k3, dt));
  return BodyRateState{
      state.p + dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
      state.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
      state.zeta + dt / 6.0 * (k1.zeta + 2.0 * k2.zeta + 2.0 * k3.zeta + k4.zeta),
      state.omega + dt / 6.0 * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega),
  };
}

Mat4 allocation_matrix(double alpha, const MorphGeometry& geom, const PlantParams& params) {
  const double r = rotor_radius(alpha, geom);
  const double yaw_ratio = params.k_m / params.k_f;
  Mat4 A;
  for (int i = 0; i < kNumArms; ++i) {
    const double az = arm_azimuth(i);
    const double x = r * std::cos(az);
    const double y = r * std::sin(az);
    const double spin = (i % 2 == 0) ? 1.0 : -1.0;
    A(0, i) = 1.0;
    A(1, i) = y;   // roll: (r x F)_x = y F
    A(2, i) = -x;  // pitch: (r x F)_y = -x F
    A(3, i) = spin * yaw_ratio;
  }
  return A;
}

ClampedThrusts apply_rotor_limits(const Vec4& thrusts, const PlantParams& params) {
  const double hi = params.max_rotor_thrust();
  ClampedThrusts out;
  out.thrusts = thrusts.cwiseMax(0.0).cwiseMin(hi);
  out.saturated = (out.thrusts.array() != thrusts.array()).any();
  return out;
}

}  // namespace morphquad
