#pragma once

#include <variant>
#include <vector>

#include "morphquad/controller.hpp"

namespace morphquad {

struct HoverTrajectory {
  Vec3 position = Vec3(0.0, 0.0, 1.0);
  double yaw = 0.0;
};

/// Constant-speed circle in a horizontal plane, starting at the point of the
/// circle closest to -y from the centre and moving counter-clockwise.
struct CircleTrajectory {
  double radius = 0.6;
  Vec3 center = Vec3(0.0, 0.6, 1.2);  // z is the altitude
  double period = 5.0;
};

struct Waypoint {
  double time = 0.0;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

/// Rest-to-rest minimum-jerk segments between consecutive waypoints; holds
/// the first waypoint before it and the last one after it.
struct WaypointTrajectory {
  std::vector<Waypoint> waypoints;
};

using Trajectory = std::variant<HoverTrajectory, CircleTrajectory, WaypointTrajectory>;

Setpoint evaluate(const Trajectory& trajectory, double t);

}  // namespace morphquad
