#include "morphquad/disturbance.hpp"

#include <cmath>

#include "morphquad/errors.hpp"

namespace morphquad {

void DisturbanceParams::validate() const {
  if (!(force_noise >= 0.0 && torque_noise >= 0.0)) throw DomainError("noise amplitudes must be non-negative");
  if (!(noise_tau > 0.0)) throw DomainError("noise correlation time must be positive");
  if (!(proximity_gain >= 0.0)) throw DomainError("proximity gain must be non-negative");
  if (!(f_max >= 0.0 && tau_max >= 0.0)) throw DomainError("disturbance bounds must be non-negative");
  if (!force_bias.allFinite() || !torque_bias.allFinite()) throw DomainError("non-finite disturbance bias");
}

double proximity_scale(double alpha, const MorphGeometry& geom, double gain) {
  return 1.0 + gain * (tip_to_tip_length(0.0, geom) / tip_to_tip_length(alpha, geom) - 1.0);
}

DisturbanceModel::DisturbanceModel(DisturbanceParams params, MorphGeometry geom, std::uint64_t seed)
    : params_(std::move(params)), geom_(std::move(geom)), rng_(seed) {
  params_.validate();
}

DisturbanceSample DisturbanceModel::sample(double alpha, double dt) {
  // Exact discretisation of a first-order Gauss-Markov process.
  const double a = std::exp(-dt / params_.noise_tau);
  const double b = std::sqrt(1.0 - a * a);
  for (int i = 0; i < 3; ++i) {
    force_noise_state_[i] = a * force_noise_state_[i] + b * params_.force_noise * normal_(rng_);
  }
  for (int i = 0; i < 3; ++i) {
    torque_noise_state_[i] = a * torque_noise_state_[i] + b * params_.torque_noise * normal_(rng_);
  }

  const double scale = proximity_scale(alpha, geom_, params_.proximity_gain);
  DisturbanceSample d;
  d.f_d = (scale * (params_.force_bias + force_noise_state_)).cwiseMax(-params_.f_max).cwiseMin(params_.f_max);
  d.tau_d_b = (scale * (params_.torque_bias + torque_noise_state_))
                  .cwiseMax(-params_.tau_max)
                  .cwiseMin(params_.tau_max);
  return d;
}

}  // namespace morphquad
