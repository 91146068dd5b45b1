#include "morphquad/trajectory.hpp"

#include <cmath>

#include "morphquad/errors.hpp"

namespace morphquad {

namespace {

Setpoint evaluate_hover(const HoverTrajectory& h) {
  Setpoint sp;
  sp.p = h.position;
  sp.psi = h.yaw;
  return sp;
}

Setpoint evaluate_circle(const CircleTrajectory& c, double t) {
  const double w = 2.0 * kPi / c.period;
  const double a = w * t;
  Setpoint sp;
  sp.p = Vec3(c.center.x() + c.radius * std::sin(a), c.center.y() - c.radius * std::cos(a), c.center.z());
  sp.v = Vec3(c.radius * w * std::cos(a), c.radius * w * std::sin(a), 0.0);
  sp.a = Vec3(-c.radius * w * w * std::sin(a), c.radius * w * w * std::cos(a), 0.0);
  return sp;
}

Setpoint evaluate_waypoints(const WaypointTrajectory& traj, double t) {
  const auto& wps = traj.waypoints;
  if (wps.empty()) {
    throw DomainError("waypoint trajectory is empty");
  }
  Setpoint sp;
  if (t <= wps.front().time) {
    sp.p = wps.front().position;
    sp.psi = wps.front().yaw;
    return sp;
  }
  if (t >= wps.back().time) {
    sp.p = wps.back().position;
    sp.psi = wps.back().yaw;
    return sp;
  }
  std::size_t i = 1;
  while (wps[i].time < t) ++i;
  const Waypoint& a = wps[i - 1];
  const Waypoint& b = wps[i];
  const double T = b.time - a.time;
  const double u = (t - a.time) / T;
  // 10u^3 - 15u^4 + 6u^5 and its derivatives.
  const double s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
  const double ds = 30.0 * u * u * (1.0 - u) * (1.0 - u) / T;
  const double dds = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (T * T);
  const Vec3 delta = b.position - a.position;
  const double dyaw = std::remainder(b.yaw - a.yaw, 2.0 * kPi);
  sp.p = a.position + s * delta;
  sp.v = ds * delta;
  sp.a = dds * delta;
  sp.psi = a.yaw + s * dyaw;
  sp.psi_dot = ds * dyaw;
  return sp;
}

}  // namespace

Setpoint evaluate(const Trajectory& trajectory, double t) {
  return std::visit(
      [t](const auto& tr) -> Setpoint {
        using T = std::decay_t<decltype(tr)>;
        if constexpr (std::is_same_v<T, HoverTrajectory>) {
          return evaluate_hover(tr);
        } else if constexpr (std::is_same_v<T, CircleTrajectory>) {
          return evaluate_circle(tr, t);
        } else {
          return evaluate_waypoints(tr, t);
        }
      },
      trajectory);
}

}  // namespace morphquad
