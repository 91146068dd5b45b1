#include "morphquad/observer.hpp"

#include "morphquad/errors.hpp"

namespace morphquad {

void ObserverGains::validate() const {
  if (!(K_f.minCoeff() > 0.0 && K_t.minCoeff() > 0.0)) {
    throw DomainError("observer gains must be strictly positive");
  }
  if (!(f_limit > 0.0 && tau_limit > 0.0)) {
    throw DomainError("observer estimate limits must be positive");
  }
}

ObserverState observer_init(const ObserverMeasurement& meas, const Vec3& J, double m) {
  ObserverState s;
  const Vec3 h = J.cwiseProduct(meas.omega);
  s.int_f = m * meas.v;
  s.int_tau = h;
  s.gyro_term = meas.omega.cross(h);
  return s;
}

ObserverState observer_update(const ObserverState& obs, const ObserverGains& gains, const ObserverMeasurement& meas,
                              const Vec3& J, double m, const Vec3& f_c, const Vec3& tau_c, double dt, double g) {
  if (!(dt > 0.0)) {
    throw DomainError("observer step must be positive");
  }
  if (!meas.v.allFinite() || !meas.omega.allFinite() || !f_c.allFinite() || !tau_c.allFinite()) {
    throw DomainError("non-finite observer input");
  }

  ObserverState next;
  const Vec3 half_k_f = 0.5 * dt * gains.K_f;
  const Vec3 half_k_t = 0.5 * dt * gains.K_t;

  // Force channel: u = f_c - m g is constant over the hold.
  const Vec3 u_f = f_c - m * g * Vec3::UnitZ();
  const Vec3 p = m * meas.v;
  const Vec3 rhs_f = obs.int_f + dt * u_f + 0.5 * dt * obs.f_hat + half_k_f.cwiseProduct(p);
  next.int_f = rhs_f.cwiseQuotient(Vec3::Ones() + half_k_f);
  next.f_hat = gains.K_f.cwiseProduct(p - next.int_f);

  // Torque channel.
  const Vec3 h = J.cwiseProduct(meas.omega);
  next.gyro_term = meas.omega.cross(h);
  const Vec3 u_prev = tau_c - obs.gyro_term;
  const Vec3 u_next = tau_c - next.gyro_term;
  const Vec3 rhs_t = obs.int_tau + 0.5 * dt * (u_prev + u_next + obs.tau_hat_b) + half_k_t.cwiseProduct(h);
  next.int_tau = rhs_t.cwiseQuotient(Vec3::Ones() + half_k_t);
  next.tau_hat_b = gains.K_t.cwiseProduct(h - next.int_tau);

  next.f_hat = next.f_hat.cwiseMax(-gains.f_limit).cwiseMin(gains.f_limit);
  next.tau_hat_b = next.tau_hat_b.cwiseMax(-gains.tau_limit).cwiseMin(gains.tau_limit);
  return next;
}

Vec3 torque_estimate_to_inertial(const Vec3& tau_hat_b, const Vec3& zeta) {
  return euler_rate_matrix(zeta).transpose() * tau_hat_b;
}

}  // namespace morphquad
