#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "morphquad/disturbance.hpp"
#include "morphquad/dynamics.hpp"
#include "morphquad/errors.hpp"

using namespace morphquad;

namespace {

const MorphGeometry kGeom;
const MassSet kMass;

PlantParams params_at(double alpha) {
  PlantParams p;
  p.m = kMass.total();
  p.J = total_inertia(alpha, kGeom, kMass);
  return p;
}

Vec3 random_attitude(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(-1.2, 1.2);
  std::uniform_real_distribution<double> yaw(-kPi, kPi);
  return {ang(rng), ang(rng), yaw(rng)};
}

Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

// Body rates from the rotation matrix: S(w) = R' Rdot, Rdot by central difference.
Vec3 body_rate_oracle(const Vec3& zeta, const Vec3& zeta_dot) {
  const double h = 1e-6;
  const Mat3 Rdot = (rotation_zyx(zeta + h * zeta_dot) - rotation_zyx(zeta - h * zeta_dot)) / (2.0 * h);
  return vee(rotation_zyx(zeta).transpose() * Rdot);
}

}  // namespace

TEST(EulerRateMatrix, IdentityAtZero) { EXPECT_EQ(euler_rate_matrix(Vec3::Zero()), Mat3::Identity()); }

TEST(EulerRateMatrix, MatchesRotationMatrixKinematics) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const Vec3 zeta = random_attitude(rng);
    const Vec3 zeta_dot = random_vec(rng, 2.0);
    EXPECT_NEAR((euler_rate_matrix(zeta) * zeta_dot - body_rate_oracle(zeta, zeta_dot)).norm(), 0.0, 1e-8);
  }
}

TEST(EulerRateMatrix, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(2);
  const double h = 1e-6;
  for (int k = 0; k < 200; ++k) {
    const Vec3 zeta = random_attitude(rng);
    const Vec3 zeta_dot = random_vec(rng, 2.0);
    const Mat3 fd = (euler_rate_matrix(zeta + h * zeta_dot) - euler_rate_matrix(zeta - h * zeta_dot)) / (2.0 * h);
    EXPECT_NEAR((euler_rate_matrix_dot(zeta, zeta_dot) - fd).norm(), 0.0, 1e-8);
  }
}

TEST(EulerRateMatrix, GimbalLockRejected) {
  EXPECT_THROW(euler_rate_matrix(Vec3(0.0, kPi / 2.0, 0.0)), SingularityError);
  EXPECT_THROW(euler_rate_matrix(Vec3(0.0, -kPi / 2.0 + 1e-4, 0.0)), SingularityError);
  EXPECT_THROW(b_and_c_matrices(Vec3(0.0, kPi / 2.0, 0.0), Vec3::Zero(), Vec3::Ones()), SingularityError);
  EXPECT_NO_THROW(euler_rate_matrix(Vec3(0.0, kPi / 2.0 - 2e-3, 0.0)));
}

TEST(InertiaCoriolis, ZeroAttitudeGivesDiagonalInertia) {
  const Vec3 J(4e-3, 4e-3, 7e-3);
  const auto [B, C] = b_and_c_matrices(Vec3::Zero(), Vec3::Zero(), J);
  EXPECT_EQ(B, Mat3(J.asDiagonal()));
  EXPECT_EQ(C, Mat3::Zero());
}

TEST(InertiaCoriolis, SymmetricPositiveDefinite) {
  std::mt19937_64 rng(3);
  const Vec3 J = params_at(0.4).J;
  for (int k = 0; k < 1000; ++k) {
    const Mat3 B = b_and_c_matrices(random_attitude(rng), random_vec(rng, 3.0), J).B;
    EXPECT_LT((B - B.transpose()).norm(), 1e-15 * B.norm());
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat3>(B).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(InertiaCoriolis, PassivitySkewSymmetry) {
  std::mt19937_64 rng(4);
  const Vec3 J = params_at(0.9).J;
  const double h = 1e-6;
  for (int k = 0; k < 1000; ++k) {
    const Vec3 zeta = random_attitude(rng);
    const Vec3 zeta_dot = random_vec(rng, 3.0);
    const Mat3 Bdot = (b_and_c_matrices(zeta + h * zeta_dot, zeta_dot, J).B -
                       b_and_c_matrices(zeta - h * zeta_dot, zeta_dot, J).B) /
                      (2.0 * h);
    const Mat3 N = Bdot - 2.0 * b_and_c_matrices(zeta, zeta_dot, J).C;
    EXPECT_LT((N + N.transpose()).cwiseAbs().maxCoeff(), 1e-9 * J.maxCoeff());
  }
}

TEST(InertiaCoriolis, ReproducesBodyFrameEulerEquation) {
  // B zeta_ddot + C zeta_dot = T' (J w_dot + w x J w) with w_dot = T zeta_ddot + Tdot zeta_dot.
  std::mt19937_64 rng(5);
  const Vec3 J(3e-3, 4e-3, 6e-3);
  const Mat3 Jm = J.asDiagonal();
  for (int k = 0; k < 200; ++k) {
    const Vec3 zeta = random_attitude(rng);
    const Vec3 zd = random_vec(rng, 3.0);
    const Vec3 zdd = random_vec(rng, 5.0);
    const Mat3 T = euler_rate_matrix(zeta);
    const Vec3 w = T * zd;
    const Vec3 wd = T * zdd + euler_rate_matrix_dot(zeta, zd) * zd;
    const Vec3 rhs = T.transpose() * (Jm * wd + w.cross(Jm * w));
    const auto [B, C] = b_and_c_matrices(zeta, zd, J);
    EXPECT_NEAR((B * zdd + C * zd - rhs).norm(), 0.0, 1e-14);
  }
}

TEST(StepDynamics, HoverIsFixedPoint) {
  const PlantParams p = params_at(0.0);
  RigidBodyState s;
  s.p = Vec3(0.3, -0.2, 1.0);
  s.zeta = Vec3(0.0, 0.0, 0.4);
  const RigidBodyState n = step_dynamics(s, p, p.m * p.g * Vec3::UnitZ(), Vec3::Zero(), {}, 1e-3);
  EXPECT_NEAR((n.p - s.p).norm(), 0.0, 1e-12);
  EXPECT_NEAR(n.v.norm(), 0.0, 1e-12);
  EXPECT_NEAR((n.zeta - s.zeta).norm(), 0.0, 1e-12);
  EXPECT_NEAR(n.zeta_dot.norm(), 0.0, 1e-12);
}

TEST(StepDynamics, FreeFallMatchesParabola) {
  const PlantParams p = params_at(0.0);
  RigidBodyState s;
  s.p.z() = 2.0;
  for (int k = 0; k < 100; ++k) s = step_dynamics(s, p, Vec3::Zero(), Vec3::Zero(), {}, 1e-3);
  EXPECT_NEAR(s.p.z(), 2.0 - 0.5 * 9.81 * 0.01, 1e-9);
  EXPECT_NEAR(s.v.z(), -0.981, 1e-9);
}

TEST(StepDynamics, FourthOrderLocalError) {
  const PlantParams p = params_at(0.5);
  RigidBodyState s0;
  s0.zeta = Vec3(0.3, -0.2, 0.5);
  s0.zeta_dot = Vec3(1.5, -2.0, 3.0);
  s0.v = Vec3(0.5, 0.1, -0.3);
  const Vec3 f(0.4, -0.2, 8.0);
  const Vec3 tau(2e-3, -1e-3, 5e-4);
  auto gap = [&](double dt) {
    const RigidBodyState one = step_dynamics(s0, p, f, tau, {}, dt);
    const RigidBodyState two = step_dynamics(step_dynamics(s0, p, f, tau, {}, dt / 2.0), p, f, tau, {}, dt / 2.0);
    return (one.zeta_dot - two.zeta_dot).norm() + (one.zeta - two.zeta).norm();
  };
  const double ratio = gap(8e-3) / gap(4e-3);
  // O(dt^5) local error: halving dt divides the gap by ~32.
  EXPECT_GT(ratio, 24.0);
  EXPECT_LT(ratio, 40.0);
}

TEST(StepDynamics, FreeFallEnergyConserved) {
  const PlantParams p = params_at(0.3);
  RigidBodyState s;
  s.p.z() = 5.0;
  s.v = Vec3(1.0, -0.5, 2.0);
  s.zeta = Vec3(0.2, 0.1, -0.3);
  auto energy = [&](const RigidBodyState& x) {
    const Vec3 w = euler_rate_matrix(x.zeta) * x.zeta_dot;
    return 0.5 * p.m * x.v.squaredNorm() + p.m * p.g * x.p.z() + 0.5 * w.dot(p.J.cwiseProduct(w));
  };
  const double e0 = energy(s);
  for (int k = 0; k < 1000; ++k) s = step_dynamics(s, p, Vec3::Zero(), Vec3::Zero(), {}, 1e-3);
  EXPECT_LT(std::abs(energy(s) - e0) / std::abs(e0), 1e-6);
}

TEST(StepDynamics, TorqueFreeTumbleConservesRotationalEnergy) {
  const PlantParams p = params_at(0.8);
  RigidBodyState s;
  s.zeta = Vec3(0.1, 0.2, 0.3);
  s.zeta_dot = Vec3(0.8, -0.6, 1.1);
  auto kinetic = [&](const RigidBodyState& x) {
    const Vec3 w = euler_rate_matrix(x.zeta) * x.zeta_dot;
    return 0.5 * w.dot(p.J.cwiseProduct(w));
  };
  const double e0 = kinetic(s);
  const Vec3 hover = p.m * p.g * Vec3::UnitZ();
  for (int k = 0; k < 1000; ++k) s = step_dynamics(s, p, hover, Vec3::Zero(), {}, 1e-3);
  EXPECT_LT(std::abs(kinetic(s) - e0) / e0, 1e-6);
}

TEST(StepDynamics, EulerAndBodyFormsAgree) {
  const PlantParams p = params_at(0.6);
  RigidBodyState a;
  a.zeta = Vec3(0.1, -0.15, 0.2);
  a.zeta_dot = Vec3(0.5, 0.3, -0.4);
  BodyRateState b{a.p, a.v, a.zeta, euler_rate_matrix(a.zeta) * a.zeta_dot};
  // Body torque enters through the disturbance channel, which both forms map
  // at every stage, so the two integrations see the same vector field.
  const Vec3 tau_b = Vec3::Zero();
  DisturbanceSample d;
  d.f_d = Vec3(0.1, 0.0, -0.05);
  d.tau_d_b = Vec3(3e-4, -2e-4, 1e-4);
  const Vec3 f = p.m * p.g * Vec3::UnitZ();
  for (int k = 0; k < 500; ++k) {
    a = step_dynamics(a, p, f, euler_rate_matrix(a.zeta).transpose() * tau_b, d, 1e-3);
    b = step_body_dynamics(b, p, f, tau_b, d, 1e-3);
  }
  EXPECT_LT((a.zeta - b.zeta).norm(), 1e-8);
  EXPECT_LT((euler_rate_matrix(a.zeta) * a.zeta_dot - b.omega).norm(), 1e-8);
  EXPECT_LT((a.p - b.p).norm(), 1e-12);
}

TEST(StepDynamics, DisturbanceForceAddsToThrust) {
  const PlantParams p = params_at(0.0);
  DisturbanceSample d;
  d.f_d = Vec3(0.5, 0.0, 0.0);
  const RigidBodyState n = step_dynamics({}, p, p.m * p.g * Vec3::UnitZ(), Vec3::Zero(), d, 1e-3);
  EXPECT_NEAR(n.v.x(), 0.5 / p.m * 1e-3, 1e-15);
}

TEST(StepDynamics, InvalidStepRejected) {
  const PlantParams p = params_at(0.0);
  EXPECT_THROW(step_dynamics({}, p, Vec3::Zero(), Vec3::Zero(), {}, 0.0), DomainError);
  EXPECT_THROW(step_dynamics({}, p, Vec3::Zero(), Vec3::Zero(), {}, 0.02), DomainError);
  RigidBodyState bad;
  bad.v.x() = std::nan("");
  EXPECT_THROW(step_dynamics(bad, p, Vec3::Zero(), Vec3::Zero(), {}, 1e-3), DomainError);
  EXPECT_THROW(step_dynamics({}, p, Vec3(std::numeric_limits<double>::infinity(), 0, 0), Vec3::Zero(), {}, 1e-3),
               DomainError);
}

TEST(StepDynamics, SingularityReachedMidStepRejected) {
  const PlantParams p = params_at(0.0);
  RigidBodyState s;
  s.zeta.y() = kPi / 2.0 - 0.01;
  s.zeta_dot.y() = 50.0;
  EXPECT_THROW(step_dynamics(s, p, Vec3::Zero(), Vec3::Zero(), {}, 1e-3), SingularityError);
}

TEST(Allocation, EqualThrustsGiveNoTorque) {
  for (double a : {0.0, deg2rad(35.0), deg2rad(70.0)}) {
    const Vec4 w = allocation_matrix(a, kGeom, params_at(a)) * Vec4::Constant(2.0);
    EXPECT_NEAR(w[0], 8.0, 1e-15);
    EXPECT_NEAR(w.tail<3>().norm(), 0.0, 1e-15);
  }
}

TEST(Allocation, AlternatingCommandIsPureYaw) {
  const Vec4 w = allocation_matrix(0.3, kGeom, params_at(0.3)) * Vec4(0.1, -0.1, 0.1, -0.1);
  EXPECT_NEAR(w[0], 0.0, 1e-15);
  EXPECT_NEAR(w[1], 0.0, 1e-15);
  EXPECT_NEAR(w[2], 0.0, 1e-15);
  EXPECT_NE(w[3], 0.0);
}

TEST(Allocation, MomentArmIsRotorRadiusOverRootTwo) {
  const double a = deg2rad(50.0);
  const Mat4 A = allocation_matrix(a, kGeom, params_at(a));
  const double arm = rotor_radius(a, kGeom) / std::sqrt(2.0);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(std::abs(A(1, i)), arm, 1e-15);
    EXPECT_NEAR(std::abs(A(2, i)), arm, 1e-15);
    EXPECT_NEAR(std::abs(A(3, i)), 1.2e-7 / 8e-6, 1e-15);
  }
}

TEST(Allocation, RoundTrip) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> fz(2.0, 15.0);
  for (double a : {0.0, deg2rad(35.0), deg2rad(70.0)}) {
    const Mat4 A = allocation_matrix(a, kGeom, params_at(a));
    const Eigen::PartialPivLU<Mat4> lu(A);
    for (int k = 0; k < 200; ++k) {
      const Vec4 w(fz(rng), random_vec(rng, 0.2).x(), random_vec(rng, 0.2).y(), random_vec(rng, 0.05).z());
      EXPECT_NEAR((A * lu.solve(w) - w).norm(), 0.0, 1e-10);
    }
  }
}

TEST(Allocation, ConditionNumberFiniteAndContinuous) {
  auto cond = [](double a) {
    const Eigen::JacobiSVD<Mat4> svd(allocation_matrix(a, kGeom, params_at(a)));
    return svd.singularValues()(0) / svd.singularValues()(3);
  };
  double prev = cond(0.0);
  for (int i = 1; i <= 700; ++i) {
    const double c = cond(kGeom.alpha_max * i / 700.0);
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_LT(std::abs(c - prev) / prev, 0.01);
    prev = c;
  }
}

TEST(RotorLimits, WithinLimitsUnchanged) {
  const PlantParams p;
  const Vec4 t(1.0, 2.0, 3.0, 4.0);
  const ClampedThrusts c = apply_rotor_limits(t, p);
  EXPECT_EQ(c.thrusts, t);
  EXPECT_FALSE(c.saturated);
}

TEST(RotorLimits, NegativeClampedToZero) {
  const ClampedThrusts c = apply_rotor_limits(Vec4(-0.5, 1.0, 1.0, 1.0), PlantParams{});
  EXPECT_EQ(c.thrusts[0], 0.0);
  EXPECT_TRUE(c.saturated);
}

TEST(RotorLimits, RandomOverLimitMatchesElementwiseClamp) {
  const PlantParams p;
  const double hi = 8e-6 * 1200.0 * 1200.0;
  EXPECT_NEAR(p.max_rotor_thrust(), hi, 1e-12);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 20.0);
  for (int k = 0; k < 500; ++k) {
    const Vec4 t(u(rng), u(rng), u(rng), u(rng));
    const ClampedThrusts c = apply_rotor_limits(t, p);
    bool any = false;
    for (int i = 0; i < 4; ++i) {
      double e = t[i];
      if (e < 0.0) e = 0.0, any = true;
      if (e > hi) e = hi, any = true;
      EXPECT_EQ(c.thrusts[i], e);
    }
    EXPECT_EQ(c.saturated, any);
  }
}

TEST(PlantParams, InvalidRejected) {
  PlantParams p;
  p.m = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = PlantParams{};
  p.J.z() = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = PlantParams{};
  p.k_m = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(Disturbance, ZeroWhenUnconfigured) {
  DisturbanceModel model({}, kGeom, 1);
  for (int k = 0; k < 100; ++k) {
    const DisturbanceSample d = model.sample(0.0, 1e-3);
    EXPECT_EQ(d.f_d, Vec3::Zero());
    EXPECT_EQ(d.tau_d_b, Vec3::Zero());
  }
}

TEST(Disturbance, ProximityScale) {
  EXPECT_DOUBLE_EQ(proximity_scale(0.0, kGeom, 4.0), 1.0);
  const double a = deg2rad(70.0);
  const double L0 = 0.122 + 2 * 0.09 + 2 * 0.04;
  const double La = 0.122 + 2 * 0.09 * std::cos(a) + 2 * 0.04;
  EXPECT_NEAR(proximity_scale(a, kGeom, 4.0), 1.0 + 4.0 * (L0 / La - 1.0), 1e-12);
}

TEST(Disturbance, BiasScaledByFold) {
  DisturbanceParams dp;
  dp.force_bias = Vec3(0.1, 0.0, -0.05);
  DisturbanceModel model(dp, kGeom, 1);
  const double a = deg2rad(40.0);
  const DisturbanceSample d = model.sample(a, 1e-3);
  EXPECT_NEAR((d.f_d - proximity_scale(a, kGeom, 4.0) * dp.force_bias).norm(), 0.0, 1e-15);
}

TEST(Disturbance, ClampedToBounds) {
  DisturbanceParams dp;
  dp.force_bias = Vec3(0.6, -0.3, 0.0);
  dp.torque_bias = Vec3(0.02, 0.0, -0.03);
  dp.force_noise = 0.5;
  dp.torque_noise = 0.02;
  DisturbanceModel model(dp, kGeom, 9);
  for (int k = 0; k < 5000; ++k) {
    const DisturbanceSample d = model.sample(kGeom.alpha_max * (k % 100) / 100.0, 1e-3);
    EXPECT_LE(d.f_d.cwiseAbs().maxCoeff(), dp.f_max);
    EXPECT_LE(d.tau_d_b.cwiseAbs().maxCoeff(), dp.tau_max);
  }
}

TEST(Disturbance, DeterministicForSeed) {
  DisturbanceParams dp;
  dp.force_noise = 0.1;
  dp.torque_noise = 0.001;
  DisturbanceModel a(dp, kGeom, 42), b(dp, kGeom, 42), c(dp, kGeom, 43);
  bool differs = false;
  for (int k = 0; k < 1000; ++k) {
    const DisturbanceSample x = a.sample(0.5, 1e-3);
    const DisturbanceSample y = b.sample(0.5, 1e-3);
    const DisturbanceSample z = c.sample(0.5, 1e-3);
    EXPECT_EQ(x.f_d, y.f_d);
    EXPECT_EQ(x.tau_d_b, y.tau_d_b);
    differs = differs || x.f_d != z.f_d;
  }
  EXPECT_TRUE(differs);
}

TEST(Disturbance, NoiseHasConfiguredSpread) {
  DisturbanceParams dp;
  dp.force_noise = 0.1;
  dp.noise_tau = 0.05;
  DisturbanceModel m2(dp, kGeom, 5);
  const int n = 200000;
  double s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = m2.sample(0.0, 1e-3).f_d.x();
    s2 += x * x;
  }
  EXPECT_NEAR(std::sqrt(s2 / n), 0.1, 0.01);
}

TEST(Disturbance, InvalidParamsRejected) {
  DisturbanceParams dp;
  dp.f_max = -1.0;
  EXPECT_THROW(dp.validate(), DomainError);
  dp = DisturbanceParams{};
  dp.force_noise = -1.0;
  EXPECT_THROW(dp.validate(), DomainError);
}
