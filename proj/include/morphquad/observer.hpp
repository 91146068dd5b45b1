#pragma once

#include "morphquad/dynamics.hpp"
#include "morphquad/math.hpp"

namespace morphquad {

struct ObserverGains {
  Vec3 K_f = Vec3::Constant(8.0);  // 1/s
  Vec3 K_t = Vec3::Constant(8.0);  // 1/s
  // Sanity clamp on the published estimates.
  double f_limit = 2.0;
  double tau_limit = 0.1;

  void validate() const;
};

struct ObserverState {
  Vec3 f_hat = Vec3::Zero();      // inertial frame
  Vec3 tau_hat_b = Vec3::Zero();  // body frame
  Vec3 int_f = Vec3::Zero();      // integral of (f_c - m g + f_hat)
  Vec3 int_tau = Vec3::Zero();    // integral of (tau_c - w x J w + tau_hat_b)
  // Integrand values at the last update, kept for the trapezoid.
  Vec3 gyro_term = Vec3::Zero();  // w x J w
};

struct ObserverMeasurement {
  Vec3 v = Vec3::Zero();      // inertial velocity
  Vec3 omega = Vec3::Zero();  // body angular velocity
};

/// Zero-estimate state consistent with the current momenta.
ObserverState observer_init(const ObserverMeasurement& meas, const Vec3& J, double m);

/// Momentum observer
///   f_hat     = K_f (m v - int(f_c - m g + f_hat))
///   tau_hat_b = K_t (J w - int(tau_c - w x J w + tau_hat_b))
/// discretised with the trapezoidal rule. f_c and tau_c are the commands held
/// over the elapsed interval; the implicit f_hat term is solved exactly since
/// the gains are diagonal.
ObserverState observer_update(const ObserverState& obs, const ObserverGains& gains, const ObserverMeasurement& meas,
                              const Vec3& J, double m, const Vec3& f_c, const Vec3& tau_c, double dt,
                              double g = kGravity);

/// Maps the body-frame torque estimate into Euler coordinates, T(zeta)' tau_b.
Vec3 torque_estimate_to_inertial(const Vec3& tau_hat_b, const Vec3& zeta);

}  // namespace morphquad
