#include "morphquad/harness.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "morphquad/disturbance.hpp"
#include "morphquad/errors.hpp"
#include "morphquad/observer.hpp"

namespace morphquad {

GapClearance gap_clearance(double alpha, const MorphGeometry& geom, double gap_width, double margin) {
  if (!(gap_width > 0.0)) {
    throw DomainError("gap width must be positive");
  }
  GapClearance out;
  out.total_width = frame_length(alpha, geom) + 2.0 * geom.prop_extent;
  out.clearance = gap_width - out.total_width;
  out.pass = out.total_width + margin < gap_width;
  return out;
}

namespace {

constexpr double kEventEps = 1e-9;

struct VehicleModel {
  MorphState morph;
  MassProperties actual;  // including any payload
};

VehicleModel vehicle_model(double servo, double payload_mass, const VehicleConfig& vc) {
  VehicleModel out;
  out.morph = morph_state_from_servo(servo, vc.geometry, vc.masses);
  Payload p = vc.payload_shape;
  p.mass = payload_mass;
  out.actual = attach_payload(mass_properties(out.morph, vc.masses), p);
  return out;
}

PlantParams plant_params(const VehicleConfig& vc, const MassProperties& mp) {
  PlantParams params = vc.rotor;
  params.m = mp.mass;
  params.J = mp.J;
  return params;
}

}  // namespace

SimulationResult simulate(const ScenarioConfig& config) {
  config.validate();
  const VehicleConfig& vc = config.vehicle;
  const SimulationSettings& sim = config.simulation;
  const double dt_p = sim.plant_dt;
  const double dt_c = sim.control_dt;
  const auto substeps = static_cast<std::size_t>(std::llround(dt_c / dt_p));
  const auto n_ticks = static_cast<std::size_t>(std::floor(config.duration / dt_c + kEventEps));

  double servo = 0.0;
  double servo_target = 0.0;
  double payload_mass = 0.0;
  std::size_t next_morph = 0;
  std::size_t next_payload = 0;

  VehicleModel model = vehicle_model(servo, payload_mass, vc);
  PlantParams plant = plant_params(vc, model.actual);
  plant.validate();

  // Start on the trajectory, attitude matching the feed-forward force.
  const Setpoint sp0 = evaluate(config.trajectory, 0.0);
  RigidBodyState state;
  state.p = sp0.p;
  state.v = sp0.v;
  {
    const AttitudeSetpoint a0 = attitude_setpoint(plant.m * (plant.g * Vec3::UnitZ() + sp0.a), sp0.psi);
    state.zeta = Vec3(a0.phi, a0.theta, sp0.psi);
  }

  AdaptiveEstimates initial;
  initial.m_hat = config.initial_mass_ratio * plant.m;
  initial.b_hat = model.morph.J;
  CascadeController controller(config.gains, initial, plant.g);

  DisturbanceModel disturbance(config.disturbance, vc.geometry, config.seed);
  DisturbanceSample last_disturbance;

  auto body_rates = [](const RigidBodyState& s) { return euler_rate_matrix(s.zeta) * s.zeta_dot; };
  // Observer model: the morphology inertia (payload excluded) and the
  // controller's mass estimate, so f_hat also carries the lumped force that
  // the controller's own model is missing.
  ObserverState obs = observer_init({state.v, body_rates(state)}, model.morph.J, initial.m_hat);
  Vec3 f_applied_mean = Vec3::Zero();
  Vec3 tau_b_applied = Vec3::Zero();

  SimulationResult result;
  result.rows.reserve(n_ticks + 1);

  for (std::size_t k = 0; k <= n_ticks; ++k) {
    const double t = static_cast<double>(k) * dt_c;
    try {
      const ObserverMeasurement meas{state.v, body_rates(state)};
      if (k > 0) {
        obs = observer_update(obs, config.observer_gains, meas, model.morph.J, controller.estimates().m_hat,
                              f_applied_mean, tau_b_applied, dt_c, plant.g);
      }

      const Setpoint sp = evaluate(config.trajectory, t);
      const ControlOutput out = controller.compute(sp, state, obs.f_hat, obs.tau_hat_b, config.observer, dt_c);

      const Mat4 A = allocation_matrix(model.morph.alpha, vc.geometry, plant);
      const Vec4 wrench(out.thrust, out.tau_b.x(), out.tau_b.y(), out.tau_b.z());
      const ClampedThrusts rotors = apply_rotor_limits(A.partialPivLu().solve(wrench), plant);
      const Vec4 applied = A * rotors.thrusts;
      const double thrust_applied = applied[0];
      tau_b_applied = applied.tail<3>();

      const auto [B, C] = b_and_c_matrices(state.zeta, state.zeta_dot, plant.J);
      const Mat3 T = euler_rate_matrix(state.zeta);
      const Vec3 force_residual = last_disturbance.f_d - out.f_hat_used;
      const Vec3 torque_residual = T.transpose() * last_disturbance.tau_d_b - out.tau_hat_euler;
      const LyapunovSample lyap =
          lyapunov_eval(controller.estimates(), controller.gains(), out.position.layer, out.attitude.layer, plant.m,
                        plant.J, B, force_residual, torque_residual);

#ifndef NDEBUG
      {
        const Vec3 lhs = B * out.attitude.zeta_ddot_r + C * out.attitude.zeta_dot_r;
        assert((out.attitude.Y * plant.J - lhs).norm() <= 1e-12 * std::max(1.0, lhs.norm()));
      }
#endif
      const Vec3 switching_diag = controller.gains().K_z2 - controller.gains().sigma2 * out.attitude.C.diagonal();
      if (switching_diag.minCoeff() < 0.0) ++result.negative_switching_gain_ticks;

      LogRow row;
      row.t = t;
      row.p = state.p;
      row.pd = sp.p;
      row.zeta = state.zeta;
      row.zetad = out.reference.zeta;
      row.v = state.v;
      row.omega = meas.omega;
      row.f = out.position.f;
      row.tau = out.attitude.tau;
      row.fhat = obs.f_hat;
      row.tauhat = obs.tau_hat_b;
      row.mhat = controller.estimates().m_hat;
      row.bhat = controller.estimates().b_hat;
      row.V = lyap.V;
      row.Vdot = lyap.V_dot;
      row.alpha = model.morph.alpha;
      row.sat_flag = rotors.saturated ? 1 : 0;
      row.s1 = out.position.s;
      row.s2 = out.attitude.s;
      row.delta1 = out.position.layer.delta;
      row.delta2 = out.attitude.layer.delta;
      row.fd = last_disturbance.f_d;
      row.taud = last_disturbance.tau_d_b;
      row.payload = payload_mass;
      result.rows.push_back(row);

      if (k == n_ticks) break;
      controller.adapt(out, dt_c);

      Vec3 f_sum = Vec3::Zero();
      for (std::size_t j = 0; j < substeps; ++j) {
        const double tp = static_cast<double>(k * substeps + j) * dt_p;
        while (next_morph < config.morph_schedule.size() &&
               config.morph_schedule[next_morph].time <= tp + kEventEps) {
          servo_target = config.morph_schedule[next_morph++].servo;
        }
        while (next_payload < config.payload_events.size() &&
               config.payload_events[next_payload].time <= tp + kEventEps) {
          const PayloadEvent& e = config.payload_events[next_payload++];
          payload_mass = e.action == PayloadAction::Attach ? e.mass : 0.0;
        }
        const double max_step = sim.servo_rate * dt_p;
        servo += std::clamp(servo_target - servo, -max_step, max_step);
        model = vehicle_model(servo, payload_mass, vc);
        plant = plant_params(vc, model.actual);

        last_disturbance = disturbance.sample(model.morph.alpha, dt_p);
        const Vec3 f = rotation_zyx(state.zeta) * Vec3::UnitZ() * thrust_applied;
        const Vec3 tau = euler_rate_matrix(state.zeta).transpose() * tau_b_applied;
        state = step_dynamics(state, plant, f, tau, last_disturbance, dt_p);
        f_sum += f;
      }
      f_applied_mean = f_sum / static_cast<double>(substeps);
    } catch (const DomainError& e) {
      throw DivergenceError(k, e.what());
    } catch (const SingularityError& e) {
      throw DivergenceError(k, e.what());
    }
  }

  result.metrics = compute_metrics(result.rows, sim.settle_tolerance);

  if (config.gap) {
    for (std::size_t k = 1; k < result.rows.size(); ++k) {
      const double before = result.rows[k - 1].p.x() - config.gap->x;
      const double after = result.rows[k].p.x() - config.gap->x;
      if ((before < 0.0) != (after < 0.0)) {
        GapCrossing c;
        c.time = result.rows[k].t;
        c.alpha = result.rows[k].alpha;
        c.clearance = gap_clearance(c.alpha, vc.geometry, config.gap->width, config.gap->margin);
        result.gap_crossing = c;
        break;
      }
    }
  }
  return result;
}

RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  RunResult r;
  r.sim = simulate(config);
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  r.log_path = out_dir / config.output;
  write_log(r.log_path, r.sim.rows);
  return r;
}

namespace {

double ratio(double a, double b) {
  if (a == b) return 1.0;
  if (b == 0.0) return std::numeric_limits<double>::infinity();
  return a / b;
}

}  // namespace

ComparisonReport compare_runs(const std::vector<LogRow>& a, const std::vector<LogRow>& b, double settle_tolerance) {
  if (a.empty() || b.empty()) throw LogError("cannot compare an empty log");
  if (a.size() != b.size() || a.back().t != b.back().t || a.front().t != b.front().t) {
    throw LogError("logs differ in duration or tick count (" + std::to_string(a.size()) + " vs " +
                   std::to_string(b.size()) + " rows)");
  }
  ComparisonReport r;
  r.a = compute_metrics(a, settle_tolerance);
  r.b = compute_metrics(b, settle_tolerance);
  for (int i = 0; i < 3; ++i) {
    r.rms_ratio[i] = ratio(r.a.rms_error[i], r.b.rms_error[i]);
    r.max_ratio[i] = ratio(r.a.max_abs_error[i], r.b.max_abs_error[i]);
  }
  // Align events by time; an event present in only one log gets one column.
  std::vector<SettlingComparison> table;
  for (const auto& s : r.a.settling) table.push_back({s.time, s.kind, s.settle_time, std::nullopt});
  for (const auto& s : r.b.settling) {
    auto it = std::find_if(table.begin(), table.end(), [&](const SettlingComparison& c) {
      return c.kind == s.kind && std::abs(c.time - s.time) < 1e-9 && !c.settle_b.has_value();
    });
    if (it != table.end()) {
      it->settle_b = s.settle_time;
    } else {
      table.push_back({s.time, s.kind, std::nullopt, s.settle_time});
    }
  }
  std::stable_sort(table.begin(), table.end(),
                   [](const SettlingComparison& x, const SettlingComparison& y) { return x.time < y.time; });
  r.settling = std::move(table);
  return r;
}

ComparisonReport compare_runs(const std::filesystem::path& log_a, const std::filesystem::path& log_b,
                              double settle_tolerance) {
  return compare_runs(read_log(log_a), read_log(log_b), settle_tolerance);
}

}  // namespace morphquad
