#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "morphquad/math.hpp"

namespace morphquad {

/// One control tick of a scenario run. Vectors are x, y, z (or roll, pitch,
/// yaw for Euler quantities).
struct LogRow {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 pd = Vec3::Zero();
  Vec3 zeta = Vec3::Zero();
  Vec3 zetad = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  Vec3 f = Vec3::Zero();    // position-loop force demand, inertial
  Vec3 tau = Vec3::Zero();  // attitude-loop torque demand, Euler coordinates
  Vec3 fhat = Vec3::Zero();
  Vec3 tauhat = Vec3::Zero();  // body frame
  double mhat = 0.0;
  Vec3 bhat = Vec3::Zero();
  double V = 0.0;
  double Vdot = 0.0;
  double alpha = 0.0;
  int sat_flag = 0;
  Vec3 s1 = Vec3::Zero();
  Vec3 s2 = Vec3::Zero();
  Vec3 delta1 = Vec3::Zero();
  Vec3 delta2 = Vec3::Zero();
  Vec3 fd = Vec3::Zero();    // true disturbance force, inertial
  Vec3 taud = Vec3::Zero();  // true disturbance torque, body
  double payload = 0.0;      // attached payload mass, kg
};

/// Column names in file order.
const std::vector<std::string>& log_columns();
std::string log_header();

/// Shortest round-trip formatting, so that a log read back reproduces the
/// in-memory doubles exactly.
void write_log(std::ostream& out, const std::vector<LogRow>& rows);
void write_log(const std::filesystem::path& path, const std::vector<LogRow>& rows);
std::vector<LogRow> read_log(std::istream& in);
std::vector<LogRow> read_log(const std::filesystem::path& path);

enum class EventKind { Morph, Payload };

struct EventSettling {
  double time = 0.0;
  EventKind kind = EventKind::Morph;
  std::optional<double> settle_time;  // empty if the error never settles before the next event
};

struct RunMetrics {
  Vec3 rms_error = Vec3::Zero();      // per axis, m
  Vec3 max_abs_error = Vec3::Zero();  // per axis, m
  double max_error = 0.0;             // Euclidean, m
  std::vector<EventSettling> settling;
  std::size_t saturation_ticks = 0;
  double min_Vdot = 0.0;
  double max_Vdot = 0.0;
  double observer_force_rms = 0.0;   // N, unsaturated ticks only
  double observer_torque_rms = 0.0;  // N m, unsaturated ticks only
};

/// Events are the first tick at which alpha starts moving after rest, and
/// every change of the payload column.
std::vector<std::pair<double, EventKind>> detect_events(const std::vector<LogRow>& rows);

RunMetrics compute_metrics(const std::vector<LogRow>& rows, double settle_tolerance);

}  // namespace morphquad
