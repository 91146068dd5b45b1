#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "morphquad/config.hpp"
#include "morphquad/telemetry.hpp"

namespace morphquad {

struct GapClearance {
  double total_width = 0.0;  // frame length plus blade overhang, m
  double clearance = 0.0;    // gap - total_width, m
  bool pass = false;         // total_width + margin < gap
};

GapClearance gap_clearance(double alpha, const MorphGeometry& geom, double gap_width, double margin = 0.0);

struct GapCrossing {
  double time = 0.0;
  double alpha = 0.0;
  GapClearance clearance;
};

struct SimulationResult {
  std::vector<LogRow> rows;
  RunMetrics metrics;
  // Control ticks at which K_z2 - sigma2 C had a negative diagonal entry.
  std::size_t negative_switching_gain_ticks = 0;
  std::optional<GapCrossing> gap_crossing;
};

/// Runs the closed loop in memory. Deterministic for a given config.
SimulationResult simulate(const ScenarioConfig& config);

struct RunResult {
  std::filesystem::path log_path;
  SimulationResult sim;
};

/// simulate() and write the CSV log into `out_dir` (created if needed).
RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

struct SettlingComparison {
  double time = 0.0;
  EventKind kind = EventKind::Morph;
  std::optional<double> settle_a;
  std::optional<double> settle_b;
};

struct ComparisonReport {
  Vec3 rms_ratio = Vec3::Ones();  // a / b per axis
  Vec3 max_ratio = Vec3::Ones();  // a / b per axis
  RunMetrics a;
  RunMetrics b;
  std::vector<SettlingComparison> settling;
};

ComparisonReport compare_runs(const std::vector<LogRow>& a, const std::vector<LogRow>& b,
                              double settle_tolerance = 0.02);
ComparisonReport compare_runs(const std::filesystem::path& log_a, const std::filesystem::path& log_b,
                              double settle_tolerance = 0.02);

}  // namespace morphquad
