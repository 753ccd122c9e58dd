#include "locsched/scenario.hpp"

#include <doctest.h>

#include <string>

using namespace locsched;

namespace {

const std::string kBase = R"(format_version: 1
name: t
dynamics: {kind: unicycle, dt: 0.05, process_noise_sigma: 0.01}
sensors:
  odometry: {sigma: 0.2, rate: 20}
  localization: {sigma: 0.03, rate: 16}
workspace:
  bounds: [0, 0, 10, 10]
  obstacles:
    - rect: [3, 3, 4, 4]
  target: {circle: [8, 8, 0.4]}
footprint: point
initial_state: [1, 1, 0, 0.785]
power: {base: 42, localization: 8}
boot: {time: 5, energy: 40}
controller:
  gains: [1.0, 2.236, 1.0, 2.236]
  epsilon_mean: 0.05
  epsilon_var: 0.01
waypoints: [[2, 2], [8, 8]]
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    load_scenario_yaml(text, "doc.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("well-formed scenario loads") {
  const Scenario s = load_scenario_yaml(kBase);
  CHECK(s.num_segments() == 2);
  CHECK(s.plant.dim() == 4);
  CHECK(s.sensors.localization_rate == 16.0);
  CHECK(s.sensors.localization_cov(0, 0) == doctest::Approx(0.0009));
  CHECK(s.power.base == 42.0);
  CHECK(s.boot.energy == 40.0);
  CHECK(s.waypoint(0)(0) == 1.0);
  CHECK(s.waypoint(2)(1) == 8.0);
}

TEST_CASE("schema violations name the file and line") {
  const std::string unknown = error_of(replace(kBase, "footprint: point", "footprint: point\nspeed: 3"));
  CHECK(unknown.find("doc.yaml:13") != std::string::npos);
  CHECK(unknown.find("unknown key 'speed'") != std::string::npos);

  CHECK(error_of(replace(kBase, "rate: 16", "rate: -16")).find("must be positive") != std::string::npos);
  CHECK(error_of(replace(kBase, "[3, 3, 4, 4]", "[3, 3, 4]")).find("4 entries") != std::string::npos);
  CHECK(error_of(replace(kBase, "format_version: 1", "format_version: 2")).find("format_version") != std::string::npos);
  CHECK(error_of(replace(kBase, "waypoints: [[2, 2], [8, 8]]", "")).find("waypoints") != std::string::npos);
  CHECK(error_of("[1, 2").find("doc.yaml:") != std::string::npos);
}

TEST_CASE("semantic checks") {
  CHECK(error_of(replace(kBase, "[[2, 2], [8, 8]]", "[[3.5, 3.5], [8, 8]]")).find("waypoint 1") != std::string::npos);
  CHECK(error_of(replace(kBase, "initial_state: [1, 1, 0, 0.785]", "initial_state: [3.5, 3.5, 0, 0]"))
            .find("initial state") != std::string::npos);
  CHECK(error_of(replace(kBase, "[1, 1, 0, 0.785]", "[1, 1]")).find("components") != std::string::npos);
}

TEST_CASE("missing scenario file") {
  CHECK_THROWS_AS(load_scenario_file("/nonexistent/scenario.yaml"), ConfigError);
}

TEST_CASE("shipped scenarios load") {
  for (const char* name : {"open", "narrow", "winding", "pc_ipc", "pc_ipc2", "single", "short"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_scenario_file(std::string(LOCSCHED_SCENARIO_DIR) + "/" + name + ".yaml"));
  }
}
