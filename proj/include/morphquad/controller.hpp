#pragma once

#include <optional>

#include "morphquad/dynamics.hpp"
#include "morphquad/math.hpp"

namespace morphquad {

struct ControllerGains {
  Vec3 Lambda1 = Vec3::Constant(2.5);
  Vec3 Lambda2 = Vec3::Constant(2.5);
  Vec3 K_p1 = Vec3::Constant(4.0);
  Vec3 K_p2 = Vec3::Constant(1.5);
  Vec3 K_z1 = Vec3::Constant(0.3);
  Vec3 K_z2 = Vec3::Constant(0.08);
  double sigma1 = 0.25;
  double sigma2 = 0.4;
  double Gamma1 = 2.0;
  Vec3 Gamma2 = Vec3::Constant(50.0);

  // Projection floors for the parameter estimates.
  double m_floor = 0.1;
  double b_floor = 1e-5;
  // Time constant of the filtered differentiation of the attitude setpoint.
  double setpoint_filter_tau = 0.02;
  // Vertical force floor, as a fraction of m_hat g, applied before the
  // attitude extraction so that the cascade never demands free fall.
  double min_lift_ratio = 0.2;

  void validate() const;
};

struct Setpoint {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  double psi = 0.0;
  double psi_dot = 0.0;
};

struct SlidingSurface {
  Vec3 s;         // e_dot + Lambda e
  Vec3 ref_rate;  // x_dot_d - Lambda e, so that s = x_dot - ref_rate
};

SlidingSurface sliding_surfaces(const Vec3& e, const Vec3& e_dot, const Vec3& Lambda, const Vec3& desired_rate);

struct BoundaryLayer {
  Vec3 delta;  // s - sigma sat(s / sigma)
  Vec3 sat;    // sat(s / sigma)
};

BoundaryLayer boundary_layer_delta(const Vec3& s, double sigma);

/// Y with B zeta_ddot_r + C zeta_dot_r = Y b for b = diag(J).
Mat3 regressor(const Vec3& zeta, const Vec3& zeta_dot, const Vec3& zeta_dot_r, const Vec3& zeta_ddot_r);

struct PositionLoop {
  Vec3 f;
  Vec3 e;
  Vec3 s;
  BoundaryLayer layer;
  Vec3 accel_ref;          // p_ddot_r
  Vec3 g_plus_accel_ref;   // g z_hat + p_ddot_r
};

/// f = m_hat (g + p_ddot_r) - K_p1 Delta_1 - K_p2 sat(s_1 / sigma_1) - f_hat
PositionLoop position_control(const Setpoint& sp, const RigidBodyState& state, const ControllerGains& gains,
                              double m_hat, const Vec3& f_hat, double g = kGravity);

struct AttitudeSetpoint {
  double phi;
  double theta;
  double thrust;
};

/// Roll and pitch that align the body z axis with f at heading psi_d.
AttitudeSetpoint attitude_setpoint(const Vec3& f, double psi_d, double min_vertical = 1e-6);

struct AttitudeReference {
  Vec3 zeta;
  Vec3 zeta_dot;
  Vec3 zeta_ddot;
};

struct AttitudeLoop {
  Vec3 tau;  // Euler-coordinate torque
  Vec3 e;
  Vec3 s;
  BoundaryLayer layer;
  Mat3 Y;
  Mat3 C;
  Vec3 zeta_dot_r;
  Vec3 zeta_ddot_r;
};

/// tau = Y b_hat - K_z1 Delta_2 - (K_z2 - sigma_2 C) sat(s_2 / sigma_2) - tau_hat
/// with tau_hat already in Euler coordinates.
AttitudeLoop attitude_control(const AttitudeReference& ref, const RigidBodyState& state, const ControllerGains& gains,
                              const Vec3& b_hat, const Vec3& tau_hat);

struct AdaptiveEstimates {
  double m_hat = 0.805;
  Vec3 b_hat = Vec3(5e-3, 5e-3, 1e-2);
};

/// Forward-Euler step of m_hat_dot = -(g + p_ddot_r)' Delta_1 / Gamma_1 and
/// b_hat_dot = -Gamma_2^-1 Y' Delta_2, followed by the projection floors.
AdaptiveEstimates adaptive_update(const AdaptiveEstimates& est, const ControllerGains& gains, const Vec3& delta1,
                                  const Vec3& delta2, const Vec3& g_plus_accel_ref, const Mat3& Y, double dt);

struct LyapunovSample {
  double V = 0.0;
  double V_dot = 0.0;
};

/// V = 1/2 D1' m D1 + 1/2 G1 m~^2 + 1/2 D2' B D2 + 1/2 b~' G2 b~, and its
/// derivative bound from the closed-loop analysis using the disturbance
/// residuals (f_d - f_hat, tau_d - tau_hat, Euler coordinates for torque).
LyapunovSample lyapunov_eval(const AdaptiveEstimates& est, const ControllerGains& gains, const BoundaryLayer& layer1,
                             const BoundaryLayer& layer2, double m, const Vec3& b, const Mat3& B,
                             const Vec3& force_residual, const Vec3& torque_residual);

/// First-order filtered numerical differentiation, value -> (rate, accel).
class SetpointDifferentiator {
 public:
  explicit SetpointDifferentiator(double tau) : tau_(tau) {}

  void update(const Vec3& value, double dt);
  const Vec3& rate() const { return rate_; }
  const Vec3& accel() const { return accel_; }

 private:
  double tau_;
  std::optional<Vec3> last_value_;
  Vec3 rate_ = Vec3::Zero();
  Vec3 accel_ = Vec3::Zero();
};

struct ControlOutput {
  PositionLoop position;
  AttitudeSetpoint attitude_sp;
  AttitudeReference reference;
  AttitudeLoop attitude;
  Vec3 tau_hat_euler = Vec3::Zero();
  Vec3 f_hat_used = Vec3::Zero();
  Vec3 tau_b;    // body torque demand
  double thrust;  // collective thrust demand
};

/// Position loop -> attitude setpoint -> attitude loop, with optional observer
/// feed-forward and online adaptation of m_hat and b_hat.
class CascadeController {
 public:
  CascadeController(ControllerGains gains, AdaptiveEstimates initial, double g = kGravity);

  /// Computes the control for this tick. Estimates are not modified.
  ControlOutput compute(const Setpoint& sp, const RigidBodyState& state, const Vec3& f_hat, const Vec3& tau_hat_b,
                        bool use_observer, double dt);

  /// Advances m_hat and b_hat using the surfaces of the last compute().
  void adapt(const ControlOutput& out, double dt);

  const AdaptiveEstimates& estimates() const { return est_; }
  const ControllerGains& gains() const { return gains_; }

 private:
  ControllerGains gains_;
  AdaptiveEstimates est_;
  double g_;
  SetpointDifferentiator attitude_diff_;
};

}  // namespace morphquad
