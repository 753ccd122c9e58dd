#include "locsched/abstraction.hpp"
#include "locsched/schedule.hpp"

#include <doctest.h>

#include <algorithm>
#include <string>

using namespace locsched;

namespace {

TimedActionTrace trace(std::initializer_list<TimedEntry> e, double end) {
  TimedActionTrace t;
  t.entries = e;
  t.end_time = end;
  return t;
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

const BeliefMdp& short_mdp() {
  static const BeliefMdp m = [] {
    const Scenario s = load_scenario_file(std::string(LOCSCHED_SCENARIO_DIR) + "/short.yaml");
    return build_mdp(s, {150, 3, Exec::Parallel});
  }();
  return m;
}

Policy random_policy(const BeliefMdp& m, Rng& rng) {
  Policy pi;
  for (int s = 0; s < m.num_states(); ++s) {
    const std::size_t na = m.actions[static_cast<std::size_t>(s)].size();
    std::vector<double> row(na, 0.0);
    double sum = 0.0;
    for (double& p : row) {
      p = uniform01(rng) < 0.3 ? 0.0 : uniform01(rng);
      sum += p;
    }
    if (sum == 0.0) {
      row[0] = 1.0;
      sum = 1.0;
    }
    for (double& p : row) p /= sum;
    pi.probs.push_back(row);
  }
  return pi;
}

}  // namespace

using TA = TimedAction;

TEST_CASE("well-formed boot sequence") {
  // boot of 5 s over 2 s segments: boot at 2, 4, 6, on at 7
  const auto t = trace({{0, TA::On}, {2, TA::Off}, {2, TA::Start}, {2, TA::Boot}, {4, TA::Boot}, {6, TA::Boot}, {7, TA::On}}, 12);
  CHECK(check_feasibility(t, 5.0).empty());
}

TEST_CASE("each feasibility rule fires on its own") {
  CHECK(has_rule(check_feasibility(trace({{0, TA::Boot}}, 10), 5), "first action"));
  CHECK(has_rule(check_feasibility(trace({{0, TA::On}, {1, TA::Start}, {1, TA::Boot}, {6, TA::On}}, 10), 5),
                 "start after off"));
  CHECK(has_rule(check_feasibility(trace({{0, TA::Off}, {1, TA::Boot}}, 10), 5), "boot after start or boot"));
  CHECK(has_rule(check_feasibility(trace({{0, TA::Off}, {1, TA::On}}, 10), 5), "on after boot or on"));
  CHECK(has_rule(check_feasibility(trace({{0, TA::Off}, {0, TA::Start}, {0, TA::Boot}, {2, TA::Off}}, 10), 5),
                 "off during boot"));
  CHECK(has_rule(check_feasibility(trace({{0, TA::Off}, {6, TA::Start}, {6, TA::Boot}}, 10), 5), "uncompletable boot"));
  CHECK(has_rule(check_feasibility(trace({{0, TA::Off}, {0, TA::Start}, {0, TA::Boot}, {4, TA::On}}, 10), 5),
                 "boot duration"));
  CHECK(has_rule(check_feasibility(trace({{3, TA::Off}, {1, TA::Off}}, 10), 5), "time order"));
}

TEST_CASE("random policies induce feasible traces") {
  const BeliefMdp& m = short_mdp();
  Rng rng = make_rng(17, {});
  for (int k = 0; k < 50; ++k) {
    const Schedule s = policy_to_schedule(random_policy(m, rng), m);
    for (int draw = 0; draw < 5; ++draw) {
      const TimedActionTrace t = sample_nominal_trace(s, rng);
      const auto v = check_feasibility(t, s.boot_time);
      CHECK(v.empty());
    }
  }
}

TEST_CASE("boot plans follow the completion rule") {
  const BeliefMdp& m = short_mdp();
  const Policy pi = label_policy(m, "sbo");
  const Schedule s = policy_to_schedule(pi, m);
  for (const auto& [key, node] : s.nodes) {
    if (!node.boot) continue;
    CHECK(node.boot->completion == boot_completion_index(m.nominal_durations, key.first, m.boot_time));
    CHECK(node.boot->offset > 0.0);
    CHECK(node.boot->offset <= m.nominal_durations[static_cast<std::size_t>(node.boot->completion)]);
  }
}

TEST_CASE("lookup, presampling and serialization") {
  const BeliefMdp& m = short_mdp();
  Rng rng = make_rng(2, {});
  const Schedule s = policy_to_schedule(random_policy(m, rng), m);
  CHECK_THROWS_AS(schedule_lookup(s, 99, 0, rng), ScheduleDomainError);

  const Schedule a = presample_schedule(s, 4), b = presample_schedule(s, 4);
  CHECK(schedule_to_json(a).dump() == schedule_to_json(b).dump());
  for (const auto& [key, node] : a.nodes) CHECK(node.dist.size() == 1);

  const Schedule back = schedule_from_json(schedule_to_json(s));
  CHECK(schedule_to_json(back).dump() == schedule_to_json(s).dump());

  nlohmann::json broken = schedule_to_json(s);
  broken["nodes"][0]["dist"] = {{"off", 0.4}, {"on", 0.4}};
  CHECK_THROWS_AS(schedule_from_json(broken), InvalidInput);
  broken["nodes"][0]["dist"] = {{"hover", 1.0}};
  CHECK_THROWS_AS(schedule_from_json(broken), InvalidInput);
}

TEST_CASE("baselines") {
  const BeliefMdp& m = short_mdp();
  const Schedule on = baseline_schedule(m, LocAction::On);
  Rng rng = make_rng(1, {});
  const TimedActionTrace t = sample_nominal_trace(on, rng);
  CHECK(t.entries.size() == static_cast<std::size_t>(m.num_segments()));
  for (const auto& e : t.entries) CHECK(e.action == TA::On);
  const Schedule off = baseline_schedule(m, LocAction::Off);
  const TimedActionTrace u = sample_nominal_trace(off, rng);
  for (const auto& e : u.entries) CHECK(e.action == TA::Off);
  double sum = 0.0;
  for (int i = 1; i <= m.num_segments(); ++i) sum += m.nominal_durations[static_cast<std::size_t>(i)];
  CHECK(u.end_time == doctest::Approx(sum));
}
