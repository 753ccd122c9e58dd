#include "locsched/mdp.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace locsched;

namespace {

BeliefMdp two_choice() {
  BeliefMdp m;
  m.states = {{"s0", StateRole::Node, 0, 0}, {"targ", StateRole::Targ}, {"coll", StateRole::Coll}};
  m.cost_names = {"energy"};
  m.actions.resize(3);
  m.actions[0] = {{"a1", {{1, 1.0}}, CostVec{10.0}}, {"a2", {{1, 0.5}, {2, 0.5}}, CostVec{2.0}}};
  m.actions[1] = {{"stay", {{1, 1.0}}, CostVec{0.0}}};
  m.actions[2] = {{"stay", {{2, 1.0}}, CostVec{0.0}}};
  return m;
}

}  // namespace

TEST_CASE("policy evaluation agrees with the recursive oracle") {
  Rng rng = make_rng(21, {});
  for (int trial = 0; trial < 50; ++trial) {
    const BeliefMdp m = oracle::random_dag(rng, 4);
    const ObjectiveSpec obj = make_objectives({"ptarg", "pcoll", "c0", "c1"}, m);
    Policy pi;
    for (int s = 0; s < m.num_states(); ++s) {
      std::vector<double> row;
      double sum = 0.0;
      for (std::size_t a = 0; a < m.actions[static_cast<std::size_t>(s)].size(); ++a) {
        row.push_back(uniform01(rng));
        sum += row.back();
      }
      for (double& p : row) p /= sum;
      pi.probs.push_back(row);
    }
    const auto got = evaluate_policy(m, pi, obj);
    const auto want = oracle::values_from(m, pi, obj);
    for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
  }
}

TEST_CASE("chain simulation is consistent with evaluation") {
  const BeliefMdp m = two_choice();
  const ObjectiveSpec obj = make_objectives({"ptarg", "energy"}, m);
  const Policy pi = deterministic_policy(m, {1, 0, 0});
  Rng rng = make_rng(4, {});
  int hits = 0;
  double cost = 0.0;
  const int runs = 20000;
  for (int r = 0; r < runs; ++r) {
    const ChainSample cs = simulate_chain(m, pi, rng);
    if (cs.absorbing_state == 1) ++hits;
    cost += cs.cost[0];
  }
  CHECK(static_cast<double>(hits) / runs == doctest::Approx(0.5).epsilon(0.05));
  CHECK(cost / runs == doctest::Approx(2.0));
  const auto v = evaluate_policy(m, pi, obj);
  CHECK(v[0] == doctest::Approx(0.5));
  CHECK(v[1] == doctest::Approx(2.0));
}

TEST_CASE("structural validation") {
  BeliefMdp m = two_choice();
  CHECK_NOTHROW(validate_mdp(m));
  m.actions[0][1].next[0].prob = 0.6;
  CHECK_THROWS_AS(validate_mdp(m), StructuralError);
  m = two_choice();
  m.actions[0][0].cost = {-1.0};
  CHECK_THROWS_AS(validate_mdp(m), StructuralError);
  m = two_choice();
  m.actions[0][0].next[0].target = 7;
  CHECK_THROWS_AS(validate_mdp(m), StructuralError);
  m = two_choice();
  m.actions[0][0].cost = {1.0, 2.0};
  CHECK_THROWS_AS(validate_mdp(m), StructuralError);
}

TEST_CASE("cycles outside absorbing states are rejected") {
  BeliefMdp m = two_choice();
  m.states.push_back({"s1", StateRole::Node, 1, 0});
  m.actions.push_back({{"back", {{0, 1.0}}, CostVec{0.0}}});
  m.actions[0][0].next = {{3, 1.0}};
  CHECK_THROWS_AS(topological_order(m), UnsupportedStructure);
}

TEST_CASE("objectives and policies") {
  const BeliefMdp m = two_choice();
  CHECK_THROWS_AS(make_objectives({"ptarg", "speed"}, m), InvalidInput);
  CHECK_THROWS_AS(make_objectives({"ptarg", "ptarg"}, m), InvalidInput);
  CHECK_THROWS_AS(make_objectives({}, m), InvalidInput);
  Policy bad = deterministic_policy(m, {0, 0, 0});
  bad.probs[0] = {0.7, 0.7};
  CHECK_THROWS_AS(validate_policy(m, bad), InvalidPolicy);
  const Policy lp = label_policy(m, "a2");
  CHECK(lp.probs[0] == std::vector<double>{0.0, 1.0});
  const Policy fallback = label_policy(m, "zzz");
  CHECK(fallback.probs[0] == std::vector<double>{1.0, 0.0});
}

TEST_CASE("JSON round trips") {
  Rng rng = make_rng(8, {});
  const BeliefMdp m = oracle::random_dag(rng, 5);
  const BeliefMdp back = mdp_from_json(mdp_to_json(m));
  CHECK(mdp_to_json(back).dump() == mdp_to_json(m).dump());
  const Policy pi = deterministic_policy(m, std::vector<int>(static_cast<std::size_t>(m.num_states()), 0));
  const Policy pb = policy_from_json(m, policy_to_json(m, pi));
  CHECK(pb.probs == pi.probs);
  nlohmann::json broken = mdp_to_json(m);
  broken["states"][0]["actions"][0]["next"][0][1] = 5.0;
  CHECK_THROWS(mdp_from_json(broken));
}
