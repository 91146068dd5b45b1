#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "morphquad/controller.hpp"
#include "morphquad/disturbance.hpp"
#include "morphquad/dynamics.hpp"
#include "morphquad/morphology.hpp"
#include "morphquad/observer.hpp"
#include "morphquad/trajectory.hpp"

namespace morphquad {

struct MorphCommand {
  double time = 0.0;   // s
  double servo = 0.0;  // rad
};

enum class PayloadAction { Attach, Release };

struct PayloadEvent {
  double time = 0.0;
  double mass = 0.0;  // kg; ignored on release
  PayloadAction action = PayloadAction::Attach;
};

struct GapSpec {
  double x = 0.0;  // gap plane position along x
  double width = 0.43;
  double margin = 0.03;
};

struct SimulationSettings {
  double plant_dt = 1e-3;
  double control_dt = 2e-3;
  double servo_rate = deg2rad(200.0);  // rad/s
  double settle_tolerance = 0.02;      // m, for settling-time metrics
};

struct VehicleConfig {
  MorphGeometry geometry;
  MassSet masses;
  PlantParams rotor;  // k_f, k_m, w_max, g; mass and inertia are derived
  Payload payload_shape;
};

struct ScenarioConfig {
  std::string name;
  double duration = 0.0;
  std::uint64_t seed = 1;
  bool observer = true;
  Trajectory trajectory = HoverTrajectory{};
  std::vector<MorphCommand> morph_schedule;
  std::vector<PayloadEvent> payload_events;
  DisturbanceParams disturbance;
  ControllerGains gains;
  ObserverGains observer_gains;
  VehicleConfig vehicle;
  SimulationSettings simulation;
  // m_hat(0) = initial_mass_ratio * true mass; b_hat(0) is the model inertia.
  double initial_mass_ratio = 0.9;
  std::optional<GapSpec> gap;
  std::string output;  // CSV file name; defaults to <name>.csv

  void validate() const;
};

/// Parses a scenario document (JSON). Quantities may carry unit suffixes;
/// unknown keys are rejected. `source` names the document in error messages.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace morphquad
