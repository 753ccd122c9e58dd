#pragma once

#include "locsched/geometry.hpp"
#include "locsched/plant.hpp"

#include <string>
#include <vector>

namespace locsched {

struct PowerModel {
  double base = 42.0;  // motors + CPU, W
  double on = 8.0;     // localization while active, W
};

struct BootModel {
  double time = 5.0;     // s
  double energy = 40.0;  // J
};

struct Scenario {
  std::string name;
  PlantModel plant;
  SensorModel sensors;
  Workspace workspace;
  RobotFootprint footprint;
  Vec initial_state;
  std::vector<Vec> waypoints;  // positions of waypoints 1..n; waypoint 0 is the initial position
  PowerModel power;
  BootModel boot;
  ControllerParams controller;
  std::vector<std::string> objectives{"ptarg", "pcoll", "energy"};

  int num_segments() const { return static_cast<int>(waypoints.size()); }
  /// Position of waypoint i, with waypoint 0 at the initial state.
  Vec waypoint(int i) const;
};

/// Parses a scenario document. Schema violations raise ConfigError with the
/// offending line when known.
Scenario load_scenario_yaml(const std::string& text, const std::string& source_name = "<scenario>");

Scenario load_scenario_file(const std::string& path);

void validate_scenario(const Scenario& s);

}  // namespace locsched
