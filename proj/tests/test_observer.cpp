#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "morphquad/errors.hpp"
#include "morphquad/observer.hpp"
#include "rigs.hpp"

using namespace morphquad;

namespace {

PlantParams plant() {
  PlantParams p;
  p.m = 0.805;
  p.J = total_inertia(0.0, MorphGeometry{}, MassSet{});
  return p;
}

Vec3 hover_force(const PlantParams& p) { return p.m * p.g * Vec3::UnitZ(); }

rig::WrenchProfile force_step(const Vec3& f) {
  return [f](double) { return DisturbanceSample{f, Vec3::Zero()}; };
}

}  // namespace

TEST(Observer, QuietAtExactHover) {
  const PlantParams p = plant();
  const auto tr = rig::run_observer(p, {}, force_step(Vec3::Zero()), 2.0, hover_force(p));
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    EXPECT_LT(tr.f_hat[i].norm(), 1e-10);
    EXPECT_LT(tr.tau_hat_b[i].norm(), 1e-10);
  }
}

TEST(Observer, ForceStepFollowsFirstOrderResponse) {
  const PlantParams p = plant();
  const double K = 8.0;
  const double d0 = 0.5;
  const auto tr = rig::run_observer(p, {}, force_step(Vec3(d0, 0.0, 0.0)), 1.5, hover_force(p));
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const double analytic = d0 * (1.0 - std::exp(-K * tr.t[i]));
    EXPECT_NEAR(tr.f_hat[i].x(), analytic, 0.01 * d0) << "t = " << tr.t[i];
  }
  // Error at the last sample before t = 3/K below 5.1 % of the step.
  const std::size_t i3 = static_cast<std::size_t>(3.0 / K / 2e-3) - 1;
  ASSERT_NEAR(tr.t[i3], 0.374, 1e-9);
  EXPECT_LT(std::abs(d0 - tr.f_hat[i3].x()), 0.051 * d0);
  EXPECT_NEAR(rig::first_crossing(tr.t, tr.f_hat, 0, 0.95 * d0), 3.0 / K, 0.02);
}

TEST(Observer, ErrorDecaysAtObserverGain) {
  const PlantParams p = plant();
  ObserverGains g;
  g.K_f = Vec3(5.0, 8.0, 12.0);
  const Vec3 d(0.3, -0.2, 0.4);
  const auto tr = rig::run_observer(p, g, force_step(d), 1.0, hover_force(p));
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t a = 50, b = 250;  // 0.1 s and 0.5 s
    const double ea = std::log(std::abs(d[axis] - tr.f_hat[a][axis]));
    const double eb = std::log(std::abs(d[axis] - tr.f_hat[b][axis]));
    const double rate = -(eb - ea) / (tr.t[b] - tr.t[a]);
    EXPECT_NEAR(rate, g.K_f[axis], 0.05 * g.K_f[axis]) << "axis " << axis;
  }
}

TEST(Observer, UnbiasedAtEquilibrium) {
  const PlantParams p = plant();
  const Vec3 d(0.4, -0.3, 0.2);
  const auto tr = rig::run_observer(p, {}, force_step(d), 10.0 / 8.0 + 0.1, hover_force(p));
  EXPECT_LT((tr.f_hat.back() - d).cwiseAbs().maxCoeff(), 1e-3 * d.cwiseAbs().maxCoeff());
}

TEST(Observer, SinusoidAttenuatedLikeFirstOrderFilter) {
  const PlantParams p = plant();
  const double K = 8.0;
  const double w0 = 10.0;
  const double amp = 0.3;
  const auto tr = rig::run_observer(
      p, {}, [&](double t) { return DisturbanceSample{Vec3(amp * std::sin(w0 * t), 0.0, 0.0), Vec3::Zero()}; }, 8.0,
      hover_force(p));
  // Least-squares fit of a sin + b cos over the last 4 s.
  Eigen::Matrix2d AtA = Eigen::Matrix2d::Zero();
  Eigen::Vector2d Atb = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    if (tr.t[i] < 4.0) continue;
    const Eigen::Vector2d row(std::sin(w0 * tr.t[i]), std::cos(w0 * tr.t[i]));
    AtA += row * row.transpose();
    Atb += row * tr.f_hat[i].x();
  }
  const Eigen::Vector2d ab = AtA.ldlt().solve(Atb);
  const double ratio = ab.norm() / amp;
  const double expected = K / std::sqrt(K * K + w0 * w0);
  EXPECT_NEAR(ratio, expected, 0.02 * expected);
}

TEST(Observer, TorqueStepFollowsFirstOrderResponse) {
  const PlantParams p = plant();
  const double K = 8.0;
  const Vec3 tau_d(0.004, -0.003, 0.002);
  const auto tr = rig::run_observer(
      p, {}, [&](double) { return DisturbanceSample{Vec3::Zero(), tau_d}; }, 0.6, hover_force(p));
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const double s = 1.0 - std::exp(-K * tr.t[i]);
    EXPECT_LT((tr.tau_hat_b[i] - s * tau_d).norm(), 0.01 * tau_d.norm()) << "t = " << tr.t[i];
  }
}

TEST(Observer, InvariantToMatchedCommandOffset) {
  const PlantParams p = plant();
  const Vec3 d(0.2, 0.1, -0.1);
  const Vec3 c(0.3, -0.4, 0.5);
  const auto a = rig::run_observer(p, {}, force_step(d), 1.0, hover_force(p));
  const auto b = rig::run_observer(p, {}, force_step(d), 1.0, hover_force(p) + c);
  for (std::size_t i = 0; i < a.t.size(); ++i) EXPECT_LT((a.f_hat[i] - b.f_hat[i]).norm(), 1e-9);
}

TEST(Observer, EstimateClampedToSanityLimit) {
  const PlantParams p = plant();
  ObserverGains g;
  g.f_limit = 0.2;
  const auto tr = rig::run_observer(p, g, force_step(Vec3(0.5, 0.0, 0.0)), 1.0, hover_force(p));
  for (const Vec3& f : tr.f_hat) EXPECT_LE(f.x(), 0.2);
  EXPECT_DOUBLE_EQ(tr.f_hat.back().x(), 0.2);
}

TEST(Observer, NonFiniteMeasurementRejected) {
  const PlantParams p = plant();
  const ObserverState s = observer_init({}, p.J, p.m);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(observer_update(s, {}, {Vec3(nan, 0, 0), Vec3::Zero()}, p.J, p.m, Vec3::Zero(), Vec3::Zero(), 2e-3),
               DomainError);
  EXPECT_THROW(observer_update(s, {}, {Vec3::Zero(), Vec3(0, 0, nan)}, p.J, p.m, Vec3::Zero(), Vec3::Zero(), 2e-3),
               DomainError);
  EXPECT_THROW(observer_update(s, {}, {}, p.J, p.m, Vec3::Zero(), Vec3::Zero(), 0.0), DomainError);
}

TEST(Observer, InvalidGainsRejected) {
  ObserverGains g;
  g.K_t.y() = 0.0;
  EXPECT_THROW(g.validate(), DomainError);
  EXPECT_NO_THROW(ObserverGains{}.validate());
}

TEST(TorqueEstimateMapping, IdentityAtLevelAttitude) {
  const Vec3 tau(0.01, -0.02, 0.03);
  EXPECT_EQ(torque_estimate_to_inertial(tau, Vec3::Zero()), tau);
  EXPECT_EQ(torque_estimate_to_inertial(Vec3::Zero(), Vec3(0.3, 0.2, 1.0)), Vec3::Zero());
}

TEST(TorqueEstimateMapping, IsTransposedRateMatrix) {
  const Vec3 zeta(0.3, -0.4, 1.2);
  const Vec3 tau(0.01, -0.02, 0.03);
  EXPECT_NEAR((torque_estimate_to_inertial(tau, zeta) - euler_rate_matrix(zeta).transpose() * tau).norm(), 0.0,
              1e-18);
  EXPECT_THROW(torque_estimate_to_inertial(tau, Vec3(0.0, kPi / 2.0, 0.0)), SingularityError);
}
