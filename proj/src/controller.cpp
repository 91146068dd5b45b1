#include "morphquad/controller.hpp"

#include <algorithm>
#include <cmath>

#include "morphquad/errors.hpp"
#include "morphquad/observer.hpp"

namespace morphquad {

namespace {

double wrap_angle(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace

void ControllerGains::validate() const {
  const bool positive = Lambda1.minCoeff() > 0.0 && Lambda2.minCoeff() > 0.0 && K_p1.minCoeff() > 0.0 &&
                        K_p2.minCoeff() > 0.0 && K_z1.minCoeff() > 0.0 && K_z2.minCoeff() > 0.0 &&
                        sigma1 > 0.0 && sigma2 > 0.0 && Gamma1 > 0.0 && Gamma2.minCoeff() > 0.0;
  if (!positive) {
    throw DomainError("controller gains must be strictly positive");
  }
  if (!(m_floor > 0.0 && b_floor > 0.0 && setpoint_filter_tau > 0.0 && min_lift_ratio > 0.0)) {
    throw DomainError("controller floors and filter constants must be positive");
  }
}

SlidingSurface sliding_surfaces(const Vec3& e, const Vec3& e_dot, const Vec3& Lambda, const Vec3& desired_rate) {
  return {e_dot + Lambda.cwiseProduct(e), desired_rate - Lambda.cwiseProduct(e)};
}

BoundaryLayer boundary_layer_delta(const Vec3& s, double sigma) {
  BoundaryLayer out;
  out.sat = (s / sigma).cwiseMax(-1.0).cwiseMin(1.0);
  out.delta = s - sigma * out.sat;
  // Inside the layer the subtraction is exact only up to round-off.
  for (int i = 0; i < 3; ++i) {
    if (std::abs(s[i]) <= sigma) out.delta[i] = 0.0;
  }
  return out;
}

Mat3 regressor(const Vec3& zeta, const Vec3& zeta_dot, const Vec3& zeta_dot_r, const Vec3& zeta_ddot_r) {
  const Mat3 T = euler_rate_matrix(zeta);
  const Mat3 Td = euler_rate_matrix_dot(zeta, zeta_dot);
  const Vec3 omega = T * zeta_dot;
  const Vec3 w = T * zeta_dot_r;
  const Vec3 a = T * zeta_ddot_r + Td * zeta_dot_r;
  Mat3 inner;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = Vec3::Unit(i);
    inner.col(i) = a[i] * e - omega[i] * e.cross(w);
  }
  return T.transpose() * inner;
}

PositionLoop position_control(const Setpoint& sp, const RigidBodyState& state, const ControllerGains& gains,
                              double m_hat, const Vec3& f_hat, double g) {
  PositionLoop out;
  out.e = state.p - sp.p;
  const Vec3 e_dot = state.v - sp.v;
  const SlidingSurface surf = sliding_surfaces(out.e, e_dot, gains.Lambda1, sp.v);
  out.s = surf.s;
  out.layer = boundary_layer_delta(out.s, gains.sigma1);
  out.accel_ref = sp.a - gains.Lambda1.cwiseProduct(e_dot);
  out.g_plus_accel_ref = g * Vec3::UnitZ() + out.accel_ref;
  out.f = m_hat * out.g_plus_accel_ref - gains.K_p1.cwiseProduct(out.layer.delta) -
          gains.K_p2.cwiseProduct(out.layer.sat) - f_hat;
  return out;
}

AttitudeSetpoint attitude_setpoint(const Vec3& f, double psi_d, double min_vertical) {
  if (!f.allFinite() || !(f.z() > min_vertical)) {
    throw DomainError("infeasible attitude: force demand has no upward component");
  }
  const Vec3 f_heading = Eigen::AngleAxisd(-psi_d, Vec3::UnitZ()) * f;
  const double thrust = f.norm();
  AttitudeSetpoint out;
  out.thrust = thrust;
  out.phi = std::asin(std::clamp(-f_heading.y() / thrust, -1.0, 1.0));
  out.theta = std::atan2(f_heading.x(), f_heading.z());
  return out;
}

AttitudeLoop attitude_control(const AttitudeReference& ref, const RigidBodyState& state, const ControllerGains& gains,
                              const Vec3& b_hat, const Vec3& tau_hat) {
  AttitudeLoop out;
  out.e = state.zeta - ref.zeta;
  out.e.z() = wrap_angle(out.e.z());
  const Vec3 e_dot = state.zeta_dot - ref.zeta_dot;
  const SlidingSurface surf = sliding_surfaces(out.e, e_dot, gains.Lambda2, ref.zeta_dot);
  out.s = surf.s;
  out.zeta_dot_r = surf.ref_rate;
  out.zeta_ddot_r = ref.zeta_ddot - gains.Lambda2.cwiseProduct(e_dot);
  out.layer = boundary_layer_delta(out.s, gains.sigma2);
  out.Y = regressor(state.zeta, state.zeta_dot, out.zeta_dot_r, out.zeta_ddot_r);
  out.C = b_and_c_matrices(state.zeta, state.zeta_dot, b_hat).C;
  const Mat3 switching = Mat3(gains.K_z2.asDiagonal()) - gains.sigma2 * out.C;
  out.tau = out.Y * b_hat - gains.K_z1.cwiseProduct(out.layer.delta) - switching * out.layer.sat - tau_hat;
  return out;
}

AdaptiveEstimates adaptive_update(const AdaptiveEstimates& est, const ControllerGains& gains, const Vec3& delta1,
                                  const Vec3& delta2, const Vec3& g_plus_accel_ref, const Mat3& Y, double dt) {
  if (!(dt > 0.0)) {
    throw DomainError("adaptation step must be positive");
  }
  AdaptiveEstimates out;
  out.m_hat = est.m_hat - dt / gains.Gamma1 * g_plus_accel_ref.dot(delta1);
  out.b_hat = est.b_hat - dt * (Y.transpose() * delta2).cwiseQuotient(gains.Gamma2);
  out.m_hat = std::max(out.m_hat, gains.m_floor);
  out.b_hat = out.b_hat.cwiseMax(gains.b_floor);
  return out;
}

LyapunovSample lyapunov_eval(const AdaptiveEstimates& est, const ControllerGains& gains, const BoundaryLayer& layer1,
                             const BoundaryLayer& layer2, double m, const Vec3& b, const Mat3& B,
                             const Vec3& force_residual, const Vec3& torque_residual) {
  const Vec3& d1 = layer1.delta;
  const Vec3& d2 = layer2.delta;
  const double m_err = m - est.m_hat;
  const Vec3 b_err = b - est.b_hat;

  LyapunovSample out;
  out.V = 0.5 * m * d1.squaredNorm() + 0.5 * gains.Gamma1 * m_err * m_err + 0.5 * d2.dot(B * d2) +
          0.5 * b_err.dot(gains.Gamma2.cwiseProduct(b_err));
  out.V_dot = -d1.dot(gains.K_p1.cwiseProduct(d1)) - d1.dot(gains.K_p2.cwiseProduct(layer1.sat)) +
              d1.dot(force_residual) - d2.dot(gains.K_z1.cwiseProduct(d2)) -
              d2.dot(gains.K_z2.cwiseProduct(layer2.sat)) + d2.dot(torque_residual);
  return out;
}

void SetpointDifferentiator::update(const Vec3& value, double dt) {
  if (!last_value_) {
    last_value_ = value;
    return;
  }
  const double k = dt / (tau_ + dt);
  Vec3 step = value - *last_value_;
  step.z() = wrap_angle(step.z());
  const Vec3 rate_prev = rate_;
  rate_ += k * (step / dt - rate_);
  accel_ += k * ((rate_ - rate_prev) / dt - accel_);
  last_value_ = value;
}

CascadeController::CascadeController(ControllerGains gains, AdaptiveEstimates initial, double g)
    : gains_(std::move(gains)), est_(initial), g_(g), attitude_diff_(gains_.setpoint_filter_tau) {
  gains_.validate();
}

ControlOutput CascadeController::compute(const Setpoint& sp, const RigidBodyState& state, const Vec3& f_hat,
                                         const Vec3& tau_hat_b, bool use_observer, double dt) {
  ControlOutput out;
  out.f_hat_used = use_observer ? f_hat : Vec3::Zero();
  out.position = position_control(sp, state, gains_, est_.m_hat, out.f_hat_used, g_);

  Vec3 lift = out.position.f;
  lift.z() = std::max(lift.z(), gains_.min_lift_ratio * est_.m_hat * g_);
  out.attitude_sp = attitude_setpoint(lift, sp.psi);

  const Vec3 zeta_d(out.attitude_sp.phi, out.attitude_sp.theta, sp.psi);
  attitude_diff_.update(zeta_d, dt);
  out.reference.zeta = zeta_d;
  out.reference.zeta_dot = attitude_diff_.rate();
  out.reference.zeta_ddot = attitude_diff_.accel();
  // Heading rate comes straight from the trajectory.
  out.reference.zeta_dot.z() = sp.psi_dot;

  out.tau_hat_euler = use_observer ? torque_estimate_to_inertial(tau_hat_b, state.zeta) : Vec3::Zero();
  out.attitude = attitude_control(out.reference, state, gains_, est_.b_hat, out.tau_hat_euler);

  const Mat3 T = euler_rate_matrix(state.zeta);
  out.tau_b = T.transpose().partialPivLu().solve(out.attitude.tau);
  out.thrust = out.attitude_sp.thrust;
  return out;
}

void CascadeController::adapt(const ControlOutput& out, double dt) {
  est_ = adaptive_update(est_, gains_, out.position.layer.delta, out.attitude.layer.delta,
                         out.position.g_plus_accel_ref, out.attitude.Y, dt);
}

}  // namespace morphquad
