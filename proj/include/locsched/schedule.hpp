#pragma once

#include "locsched/mdp.hpp"
#include "locsched/rng.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace locsched {

enum class LocAction { Off, On, Sbo };
enum class TimedAction { Start, Boot, On, Off };

const char* to_string(LocAction a);
const char* to_string(TimedAction a);

/// Boot started at waypoint `start` completes inside segment `completion`,
/// `offset` seconds after that segment begins.
struct BootPlan {
  int start;
  int completion;
  double offset;
};

struct NodeSchedule {
  std::vector<std::pair<LocAction, double>> dist;
  std::optional<BootPlan> boot;  // set when Sbo has positive probability
};

struct Schedule {
  int segments = 0;
  std::vector<double> nominal_durations;  // index 1..segments
  double boot_time = 0.0;
  std::map<std::pair<int, int>, NodeSchedule> nodes;  // keyed by (i, j), i < segments
  nlohmann::json provenance = nlohmann::json::object();
};

Schedule policy_to_schedule(const Policy& pi, const BeliefMdp& mdp);

/// Schedule that always takes `a` where available (On or Off baselines).
Schedule baseline_schedule(const BeliefMdp& mdp, LocAction a);

LocAction schedule_lookup(const Schedule& s, int i, int j, Rng& rng);

/// Resolves every randomized node once, giving a deterministic schedule.
Schedule presample_schedule(const Schedule& s, std::uint64_t seed);

/// Entry (t, a): localization action a takes effect at time t. A boot is
/// written as a_start followed by a_boot at every decision time inside the
/// boot window (including its first instant) and a_on at its completion.
struct TimedEntry {
  double t;
  TimedAction action;
};

struct TimedActionTrace {
  std::vector<TimedEntry> entries;
  double end_time = 0.0;  // arrival at the last waypoint
};

struct Violation {
  std::string rule;
  std::size_t index;  // offending entry
};

std::vector<Violation> check_feasibility(const TimedActionTrace& trace, double boot_time);

/// Walks the schedule along nominal segment durations, sampling each node.
TimedActionTrace sample_nominal_trace(const Schedule& s, Rng& rng);

nlohmann::json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j);

}  // namespace locsched
