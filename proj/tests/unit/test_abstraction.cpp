#include "locsched/abstraction.hpp"

#include <doctest.h>

#include <algorithm>
#include <string>

using namespace locsched;

namespace {

Scenario shipped(const char* name) { return load_scenario_file(std::string(LOCSCHED_SCENARIO_DIR) + "/" + name + ".yaml"); }

}  // namespace

TEST_CASE("boot completion index") {
  const std::vector<double> d{0.0, 2.0, 2.0, 1.0, 3.0};
  CHECK(boot_completion_index(d, 0, 3.0) == 2);  // 2+2 > 3
  CHECK(boot_completion_index(d, 0, 4.0) == 3);  // 4 is not strictly above 4
  CHECK(boot_completion_index(d, 2, 3.5) == 4);
  CHECK(boot_completion_index(d, 3, 3.0) == -1);
  CHECK(boot_completion_index(d, 1, 100.0) == -1);
}

TEST_CASE("state count law") {
  for (int n : {1, 2, 5, 26, 40}) CHECK(expected_state_count(n) == (n + 2) * (n + 1) / 2 + 3);
  const Scenario single = shipped("single");
  const BeliefMdp m1 = build_mdp(single, {200, 1, Exec::Parallel});
  CHECK(m1.num_states() == 6);
  const Scenario s = shipped("short");
  const BeliefMdp m = build_mdp(s, {200, 1, Exec::Parallel});
  CHECK(m.num_states() == expected_state_count(s.num_segments()));
  CHECK(m.initial == m.find_state("n0_0"));
  CHECK(m.is_absorbing(m.role_state(StateRole::Targ)));
  CHECK(m.is_absorbing(m.role_state(StateRole::Coll)));
  CHECK(m.is_absorbing(m.role_state(StateRole::Free)));
}

TEST_CASE("action availability per node") {
  const Scenario s = shipped("short");
  const BeliefMdp m = build_mdp(s, {200, 1, Exec::Parallel});
  const int n = s.num_segments();
  for (int st = 0; st < m.num_states(); ++st) {
    const MdpState& ms = m.states[static_cast<std::size_t>(st)];
    if (ms.role != StateRole::Node) continue;
    std::vector<std::string> labels;
    for (const auto& a : m.actions[static_cast<std::size_t>(st)]) labels.push_back(a.label);
    CAPTURE(ms.id);
    if (ms.i == n) {
      CHECK(labels == std::vector<std::string>{"fin"});
      continue;
    }
    CHECK(labels.at(0) == "off");
    const bool has_on = std::find(labels.begin(), labels.end(), "on") != labels.end();
    const bool has_sbo = std::find(labels.begin(), labels.end(), "sbo") != labels.end();
    CHECK(has_on == (ms.i == ms.j));
    if (ms.i != ms.j) CHECK(has_sbo == (boot_completion_index(m.nominal_durations, ms.i, m.boot_time) >= 0));
  }
}

TEST_CASE("abstraction is identical for serial and parallel execution") {
  const Scenario s = shipped("short");
  set_thread_count(4);
  const BeliefMdp par = build_mdp(s, {150, 7, Exec::Parallel});
  set_thread_count(0);
  const BeliefMdp ser = build_mdp(s, {150, 7, Exec::Serial});
  CHECK(mdp_to_json(par).dump() == mdp_to_json(ser).dump());
  const BeliefMdp other = build_mdp(s, {150, 8, Exec::Serial});
  CHECK(mdp_to_json(other).dump() != mdp_to_json(ser).dump());
}

TEST_CASE("systematic resampling keeps mass proportional to weight") {
  ParticleBelief b;
  for (int k = 0; k < 4; ++k) b.particles.push_back({Vec::Constant(2, k), {Vec::Zero(2), Mat::Zero(2, 2)}});
  b.weights = {0.1, 0.0, 0.6, 0.3};
  Rng rng = make_rng(1, {});
  const ParticleBelief r = resample_systematic(b, 1000, rng);
  int counts[4] = {0, 0, 0, 0};
  for (const auto& p : r.particles) ++counts[static_cast<int>(p.x(0))];
  CHECK(counts[1] == 0);
  CHECK(std::abs(counts[0] - 100) <= 1);
  CHECK(std::abs(counts[2] - 600) <= 1);
  CHECK(std::abs(counts[3] - 300) <= 1);
}
