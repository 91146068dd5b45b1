#pragma once

#include <cstdint>
#include <random>

#include "morphquad/dynamics.hpp"
#include "morphquad/morphology.hpp"

namespace morphquad {

/// Synthetic aerodynamic disturbance that grows as the rotors move closer:
/// d = scale(alpha) (bias + coloured noise),
/// scale(alpha) = 1 + c (L(0) / L(alpha) - 1), clamped componentwise.
struct DisturbanceParams {
  Vec3 force_bias = Vec3::Zero();
  Vec3 torque_bias = Vec3::Zero();
  double force_noise = 0.0;   // stationary std-dev of the noise, N
  double torque_noise = 0.0;  // N m
  double noise_tau = 0.2;     // noise correlation time, s
  double proximity_gain = 4.0;
  double f_max = 1.0;
  double tau_max = 0.05;

  void validate() const;
};

double proximity_scale(double alpha, const MorphGeometry& geom, double gain);

class DisturbanceModel {
 public:
  DisturbanceModel(DisturbanceParams params, MorphGeometry geom, std::uint64_t seed);

  /// Advances the noise by dt and returns the sample for fold angle alpha.
  DisturbanceSample sample(double alpha, double dt);

  const DisturbanceParams& params() const { return params_; }

 private:
  DisturbanceParams params_;
  MorphGeometry geom_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Vec3 force_noise_state_ = Vec3::Zero();
  Vec3 torque_noise_state_ = Vec3::Zero();
};

}  // namespace morphquad
