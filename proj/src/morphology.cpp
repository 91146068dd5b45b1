#include "morphquad/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "morphquad/errors.hpp"

namespace morphquad {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string("geometry: ") + name + " must be positive and finite");
  }
}

void check_alpha(double alpha, const MorphGeometry& geom) {
  // Small slack so that alpha_max computed through the servo map is accepted.
  constexpr double kSlack = 1e-12;
  if (!(alpha >= -kSlack && alpha <= geom.alpha_max + kSlack)) {
    throw DomainError("fold angle " + std::to_string(alpha) + " rad outside [0, alpha_max]");
  }
}

void check_arm(int arm_index) {
  if (arm_index < 0 || arm_index >= kNumArms) {
    throw DomainError("arm index " + std::to_string(arm_index) + " outside 0..3");
  }
}

Vec3 radial(int arm_index) {
  const double az = arm_azimuth(arm_index);
  return {std::cos(az), std::sin(az), 0.0};
}

Mat3 yaw(double az) { return Eigen::AngleAxisd(az, Vec3::UnitZ()).toRotationMatrix(); }

}  // namespace

void MorphGeometry::validate() const {
  require_positive(l_b, "l_b");
  require_positive(l_a, "l_a");
  require_positive(l_m, "l_m");
  require_positive(h_b, "h_b");
  require_positive(h_r, "h_r");
  require_positive(r_r, "r_r");
  require_positive(h_a, "h_a");
  require_positive(w_a, "w_a");
  require_positive(h_m, "h_m");
  require_positive(w_m, "w_m");
  require_positive(k_servo, "k_servo");
  if (!(alpha_max > 0.0 && alpha_max <= kPi / 2.0)) {
    throw DomainError("geometry: alpha_max must lie in (0, pi/2]");
  }
  if (!(c_r >= 0.0) || !(rotor_offset >= 0.0) || !(prop_extent >= 0.0)) {
    throw DomainError("geometry: offsets must be non-negative");
  }
}

void MassSet::validate() const {
  if (!(m_b >= 0.0 && m_a >= 0.0 && m_m >= 0.0 && m_r >= 0.0)) {
    throw DomainError("masses must be non-negative");
  }
}

double arm_azimuth(int arm_index) {
  check_arm(arm_index);
  return kPi / 4.0 + arm_index * kPi / 2.0;
}

double fold_angle_from_servo(double gamma, const MorphGeometry& geom) {
  if (!(gamma >= 0.0)) {
    throw DomainError("servo angle must be non-negative");
  }
  return std::clamp(geom.k_servo * gamma, 0.0, geom.alpha_max);
}

double tip_to_tip_length(double alpha, const MorphGeometry& geom) {
  check_alpha(alpha, geom);
  return geom.l_b + 2.0 * geom.l_a * std::cos(alpha) + 2.0 * geom.l_m;
}

double frame_length(double alpha, const MorphGeometry& geom) {
  return tip_to_tip_length(alpha, geom) / std::sqrt(2.0);
}

double rotor_radius(double alpha, const MorphGeometry& geom) {
  check_alpha(alpha, geom);
  return geom.l_b / 2.0 + geom.l_a * std::cos(alpha) + geom.rotor_offset;
}

ModulePositions module_positions(double alpha, const MorphGeometry& geom) {
  check_alpha(alpha, geom);
  const double down = geom.fold_down ? -1.0 : 1.0;
  const Vec3 up = Vec3::UnitZ();

  ModulePositions out;
  for (int i = 0; i < kNumArms; ++i) {
    const Vec3 e = radial(i);
    const Vec3 hinge = 0.5 * geom.l_b * e;
    const Vec3 arm_dir = std::cos(alpha) * e + down * std::sin(alpha) * up;
    const Vec3 tip = hinge + geom.l_a * arm_dir;
    out.arm[i] = hinge + 0.5 * geom.l_a * arm_dir;
    // Parallelogram linkage: the motor base translates with the tip but keeps
    // its horizontal orientation.
    out.motor_base[i] = tip + 0.5 * geom.l_m * e;
    out.rotor[i] = tip + geom.rotor_offset * e + geom.c_r * up;
  }
  return out;
}

Vec3 cog_offset(double alpha, const MorphGeometry& geom, const MassSet& masses) {
  const double total = masses.total();
  if (!(total > 0.0)) {
    throw DomainError("total mass must be positive");
  }
  const ModulePositions pos = module_positions(alpha, geom);
  Vec3 moment = Vec3::Zero();
  for (int i = 0; i < kNumArms; ++i) {
    moment += masses.m_a * pos.arm[i] + masses.m_m * pos.motor_base[i] + masses.m_r * pos.rotor[i];
  }
  Vec3 r = moment / total;
  // The four-fold symmetric sum cancels in x and y only up to round-off.
  if (std::abs(r.x()) < 1e-15) r.x() = 0.0;
  if (std::abs(r.y()) < 1e-15) r.y() = 0.0;
  return r;
}

Vec3 primitive_inertia(const Primitive& shape, double mass) {
  if (!(mass >= 0.0)) {
    throw DomainError("primitive mass must be non-negative");
  }
  auto positive = [](double d) {
    if (!(d > 0.0)) throw DomainError("primitive dimensions must be positive");
    return d * d;
  };
  const double k = mass / 12.0;
  return std::visit(
      [&](const auto& s) -> Vec3 {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) {
          const double l2 = positive(s.length);
          const double h2 = positive(s.height);
          return k * Vec3(l2 + h2, l2 + h2, 2.0 * l2);
        } else if constexpr (std::is_same_v<T, CylinderShape>) {
          const double r2 = positive(s.radius);
          const double h2 = positive(s.height);
          return k * Vec3(3.0 * r2 + h2, 3.0 * r2 + h2, 6.0 * r2);
        } else {
          const double x2 = positive(s.lx);
          const double y2 = positive(s.ly);
          const double z2 = positive(s.lz);
          return k * Vec3(y2 + z2, x2 + z2, x2 + y2);
        }
      },
      shape);
}

Mat3 fold_rotation(double alpha, int arm_index, bool fold_down) {
  const double az = arm_azimuth(arm_index);
  const Vec3 axis(-std::sin(az), std::cos(az), 0.0);
  return Eigen::AngleAxisd(fold_down ? alpha : -alpha, axis).toRotationMatrix();
}

Mat3 rotate_arm_inertia(const Mat3& J_a, double alpha, int arm_index, bool fold_down) {
  const Mat3 R = fold_rotation(alpha, arm_index, fold_down);
  return R * J_a * R.transpose();
}

Mat3 rotate_arm_inertia(const Vec3& J_a, double alpha, int arm_index, bool fold_down) {
  return rotate_arm_inertia(Mat3(J_a.asDiagonal()), alpha, arm_index, fold_down);
}

ModuleInertias module_inertias(double alpha, const MorphGeometry& geom, const MassSet& masses) {
  check_alpha(alpha, geom);
  ModuleInertias out;
  out.body = primitive_inertia(BoxShape{geom.l_b, geom.h_b}, masses.m_b).asDiagonal();
  const Vec3 arm_local = primitive_inertia(CuboidShape{geom.l_a, geom.w_a, geom.h_a}, masses.m_a);
  const Vec3 base_local = primitive_inertia(CuboidShape{geom.l_m, geom.w_m, geom.h_m}, masses.m_m);
  const Mat3 rotor = primitive_inertia(CylinderShape{geom.r_r, geom.h_r}, masses.m_r).asDiagonal();
  for (int i = 0; i < kNumArms; ++i) {
    const Mat3 Rz = yaw(arm_azimuth(i));
    const Mat3 arm_stretched = Rz * arm_local.asDiagonal() * Rz.transpose();
    out.arm[i] = rotate_arm_inertia(arm_stretched, alpha, i, geom.fold_down);
    out.motor_base[i] = Rz * base_local.asDiagonal() * Rz.transpose();
    out.rotor[i] = rotor;
  }
  return out;
}

Mat3 assemble_inertia(const ModuleInertias& modules, const ModulePositions& positions,
                      const MassSet& masses, const Vec3& r_cog) {
  auto shifted = [&](const Mat3& J, double m, const Vec3& r) -> Mat3 {
    const Mat3 S = skew(r - r_cog);
    return J - m * S * S;
  };
  Mat3 J = shifted(modules.body, masses.m_b, Vec3::Zero());
  for (int i = 0; i < kNumArms; ++i) {
    J += shifted(modules.arm[i], masses.m_a, positions.arm[i]);
    J += shifted(modules.motor_base[i], masses.m_m, positions.motor_base[i]);
    J += shifted(modules.rotor[i], masses.m_r, positions.rotor[i]);
  }
  return J;
}

Mat3 inertia_matrix(double alpha, const MorphGeometry& geom, const MassSet& masses) {
  return assemble_inertia(module_inertias(alpha, geom, masses), module_positions(alpha, geom), masses,
                          cog_offset(alpha, geom, masses));
}

Vec3 total_inertia(double alpha, const MorphGeometry& geom, const MassSet& masses) {
  const Mat3 J = inertia_matrix(alpha, geom, masses);
  const Vec3 d = J.diagonal();
  if (!(d.minCoeff() > 0.0)) {
    throw ConsistencyError("composite inertia has a non-positive principal moment");
  }
  const Mat3 off = J - Mat3(d.asDiagonal());
  if (off.cwiseAbs().maxCoeff() > 1e-12 * d.maxCoeff()) {
    throw ConsistencyError("composite inertia is not diagonal; mass set is not symmetric");
  }
  return d;
}

MorphState morph_state_from_alpha(double alpha, const MorphGeometry& geom, const MassSet& masses) {
  MorphState s;
  s.alpha = alpha;
  s.gamma = alpha / geom.k_servo;
  s.L = tip_to_tip_length(alpha, geom);
  s.r_cog = cog_offset(alpha, geom, masses);
  s.J = total_inertia(alpha, geom, masses);
  return s;
}

MorphState morph_state_from_servo(double gamma, const MorphGeometry& geom, const MassSet& masses) {
  MorphState s = morph_state_from_alpha(fold_angle_from_servo(gamma, geom), geom, masses);
  s.gamma = gamma;
  return s;
}

MassProperties mass_properties(const MorphState& morph, const MassSet& masses) {
  return {masses.total(), morph.r_cog, morph.J};
}

MassProperties attach_payload(const MassProperties& vehicle, const Payload& payload) {
  if (!(payload.mass >= 0.0)) {
    throw DomainError("payload mass must be non-negative");
  }
  if (payload.mass == 0.0) {
    return vehicle;
  }
  MassProperties out;
  out.mass = vehicle.mass + payload.mass;
  out.cog = (vehicle.mass * vehicle.cog + payload.mass * payload.offset) / out.mass;
  const Vec3 J_box = primitive_inertia(CuboidShape{payload.dims.x(), payload.dims.y(), payload.dims.z()},
                                       payload.mass);
  const Mat3 Sv = skew(vehicle.cog - out.cog);
  const Mat3 Sp = skew(payload.offset - out.cog);
  const Mat3 J = Mat3(vehicle.J.asDiagonal()) - vehicle.mass * Sv * Sv + Mat3(J_box.asDiagonal()) -
                 payload.mass * Sp * Sp;
  out.J = J.diagonal();
  return out;
}

}  // namespace morphquad
