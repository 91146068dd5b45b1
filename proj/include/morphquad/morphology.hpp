#pragma once

#include <array>
#include <variant>

#include "morphquad/math.hpp"

namespace morphquad {

inline constexpr int kNumArms = 4;

/// Static dimensions of the folding frame. Lengths in metres, angles in
/// radians. Frame F_c sits at the geometric centre at arm-hinge height; rest
/// heights of the modules are measured from there.
struct MorphGeometry {
  double l_b = 0.122;  // body length (square footprint)
  double l_a = 0.09;   // arm length, hinge to motor base
  double l_m = 0.04;   // motor-base length
  double h_b = 0.04;   // body height
  double h_r = 0.03;   // rotor (motor + hub) cylinder height
  double r_r = 0.02;   // rotor cylinder radius
  double h_a = 0.006;  // arm cross-section
  double w_a = 0.012;
  double h_m = 0.02;  // motor-base cross-section
  double w_m = 0.03;
  double c_r = 0.02;            // rotor CoG above the motor-base CoG
  double rotor_offset = 0.02;   // rotor axis, measured outward from the arm tip
  double prop_extent = 0.0699;  // blade overhang per side beyond frame_length
  double alpha_max = deg2rad(70.0);
  double k_servo = 1.4;  // alpha / gamma
  bool fold_down = true;

  void validate() const;
};

/// Per-module masses in kilograms. Arms, motor bases and rotors come in fours.
struct MassSet {
  double m_b = 0.485;
  double m_a = 0.020;
  double m_m = 0.030;
  double m_r = 0.030;

  double total() const { return m_b + kNumArms * (m_a + m_m + m_r); }
  void validate() const;
};

struct MorphState {
  double alpha = 0.0;  // fold angle
  double gamma = 0.0;  // servo angle
  double L = 0.0;      // tip-to-tip length
  Vec3 r_cog = Vec3::Zero();
  Vec3 J = Vec3::Zero();  // diag(Jxx, Jyy, Jzz) about the CoG
};

/// CoG of every module in F_c, indexed by arm (0..3, counter-clockwise from +x+y).
struct ModulePositions {
  std::array<Vec3, kNumArms> arm;
  std::array<Vec3, kNumArms> motor_base;
  std::array<Vec3, kNumArms> rotor;
};

// Azimuth of arm i in the X configuration.
double arm_azimuth(int arm_index);

double fold_angle_from_servo(double gamma, const MorphGeometry& geom);
double tip_to_tip_length(double alpha, const MorphGeometry& geom);
/// Distance between adjacent motor bases: L / sqrt(2).
double frame_length(double alpha, const MorphGeometry& geom);
/// Horizontal distance from the body z axis to a rotor axis.
double rotor_radius(double alpha, const MorphGeometry& geom);

ModulePositions module_positions(double alpha, const MorphGeometry& geom);
Vec3 cog_offset(double alpha, const MorphGeometry& geom, const MassSet& masses);

struct BoxShape {  // square footprint length x length, height
  double length;
  double height;
};
struct CylinderShape {  // axis along z
  double radius;
  double height;
};
struct CuboidShape {  // edge lengths along x, y, z of the module frame
  double lx;
  double ly;
  double lz;
};
using Primitive = std::variant<BoxShape, CylinderShape, CuboidShape>;

/// Principal moments of a homogeneous solid about its own CoG.
Vec3 primitive_inertia(const Primitive& shape, double mass);

/// Rotation carrying arm i from the stretched pose to fold angle alpha, about
/// the horizontal axis perpendicular to the arm's radial direction.
Mat3 fold_rotation(double alpha, int arm_index, bool fold_down = true);

Mat3 rotate_arm_inertia(const Vec3& J_a, double alpha, int arm_index, bool fold_down = true);
Mat3 rotate_arm_inertia(const Mat3& J_a, double alpha, int arm_index, bool fold_down = true);

/// Module inertias about each module's own CoG, expressed in F_c.
struct ModuleInertias {
  Mat3 body;
  std::array<Mat3, kNumArms> arm;
  std::array<Mat3, kNumArms> motor_base;
  std::array<Mat3, kNumArms> rotor;
};

ModuleInertias module_inertias(double alpha, const MorphGeometry& geom, const MassSet& masses);

/// Composite inertia about r_cog with parallel-axis terms -m S(r - r_cog)^2.
/// The body CoG is taken at the origin of F_c.
Mat3 assemble_inertia(const ModuleInertias& modules, const ModulePositions& positions,
                      const MassSet& masses, const Vec3& r_cog);

Mat3 inertia_matrix(double alpha, const MorphGeometry& geom, const MassSet& masses);
Vec3 total_inertia(double alpha, const MorphGeometry& geom, const MassSet& masses);

MorphState morph_state_from_alpha(double alpha, const MorphGeometry& geom, const MassSet& masses);
MorphState morph_state_from_servo(double gamma, const MorphGeometry& geom, const MassSet& masses);

/// Point-mass payload held by the gripper, modelled as a homogeneous box.
struct Payload {
  double mass = 0.0;
  Vec3 offset = Vec3(0.0, 0.0, -0.12);  // box CoG in F_c
  Vec3 dims = Vec3(0.12, 0.15, 0.19);
};

struct MassProperties {
  double mass = 0.0;
  Vec3 cog = Vec3::Zero();  // in F_c
  Vec3 J = Vec3::Zero();    // diagonal, about cog
};

MassProperties mass_properties(const MorphState& morph, const MassSet& masses);
MassProperties attach_payload(const MassProperties& vehicle, const Payload& payload);

}  // namespace morphquad
