#pragma once

#include "locsched/closed_loop.hpp"
#include "locsched/kernels.hpp"
#include "locsched/schedule.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace locsched {

enum class Outcome { Collision = 0, Target = 1, Free = 2 };

const char* to_string(Outcome o);

struct RunRecord {
  Outcome outcome = Outcome::Free;
  CostVec cost;  // energy, loc_energy, duration
  std::vector<TraceSample> trace;
  TimedActionTrace actions;
};

/// One mission from the stabilized initial belief. All randomness, including
/// the schedule's choices, comes from `seed`.
RunRecord simulate_mission(const ClosedLoopContext& ctx, const Schedule& schedule, std::uint64_t seed,
                           bool keep_trace = true);
RunRecord simulate_mission(const Scenario& s, const Schedule& schedule, std::uint64_t seed);

/// Quantities compared by validate().
const std::vector<std::string>& validation_quantities();  // ptarg, pcoll, energy, loc_energy, duration

/// MDP values of the validation quantities under pi.
std::vector<double> theoretical_values(const BeliefMdp& mdp, const Policy& pi);

struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;  // 95% normal approximation
};

struct ValidationReport {
  int runs = 0;
  std::array<int, 3> outcomes{};  // indexed by Outcome
  std::vector<Estimate> empirical;
  std::vector<double> theoretical;
  std::vector<double> deviation;  // empirical - theoretical
  std::vector<RunRecord> samples;  // first few runs with traces
};

/// Run r uses the mission seed stream_key(seed, {r}); results do not depend on exec.
ValidationReport validate(const Scenario& s, const Schedule& schedule, const std::vector<double>& theoretical, int runs,
                          std::uint64_t seed, Exec exec = Exec::Parallel, int keep_samples = 0);

/// Per quantity: probabilities within max(3 sigma binomial, prob_allowance),
/// costs within cost_rel relative error.
std::vector<bool> consistency(const ValidationReport& r, double prob_allowance, double cost_rel);

/// Keeps at most max_points samples, always including status changes and the last sample.
std::vector<TraceSample> decimate(const std::vector<TraceSample>& trace, std::size_t max_points);

nlohmann::json report_to_json(const ValidationReport& r, double prob_allowance, double cost_rel);
void write_traces_csv(std::ostream& os, const std::vector<RunRecord>& runs);
std::string render_svg(const Scenario& s, const std::vector<RunRecord>& runs);

}  // namespace locsched
