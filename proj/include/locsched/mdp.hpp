#pragma once

#include "locsched/rng.hpp"
#include "locsched/types.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace locsched {

enum class StateRole { Node, Coll, Targ, Free };

struct MdpState {
  std::string id;
  StateRole role = StateRole::Node;
  int i = -1;  // waypoint index, Node only
  int j = -1;  // last-localization index, Node only
};

struct Transition {
  int target;
  double prob;
};

struct MdpAction {
  std::string label;
  std::vector<Transition> next;
  CostVec cost;
};

struct BeliefMdp {
  std::vector<MdpState> states;
  std::vector<std::vector<MdpAction>> actions;  // per state
  int initial = 0;
  std::vector<std::string> cost_names;
  // Segment metadata used to expand policies into timed schedules.
  std::vector<double> nominal_durations;  // index 1..n, entry 0 unused
  double boot_time = 0.0;
  nlohmann::json provenance = nlohmann::json::object();

  int num_states() const { return static_cast<int>(states.size()); }
  int num_state_actions() const;
  int find_state(const std::string& id) const;  // -1 when absent
  int role_state(StateRole r) const;            // -1 when absent
  bool is_absorbing(int s) const;
  int num_segments() const { return static_cast<int>(nominal_durations.size()) - 1; }
};

/// Throws StructuralError on malformed rows (bad targets, sums away from one,
/// negative costs, mismatched cost lengths).
void validate_mdp(const BeliefMdp& mdp, double tol = 1e-12);

/// Topological order of the non-absorbing part; self-loops of absorbing
/// states are ignored. Throws UnsupportedStructure on cycles.
std::vector<int> topological_order(const BeliefMdp& mdp);

struct Objective {
  enum class Kind { ReachTarg, ReachColl, TotalCost };
  Kind kind;
  int cost_index = -1;
  std::string name;
  bool maximize() const { return kind == Kind::ReachTarg; }
};

using ObjectiveSpec = std::vector<Objective>;

/// Objective names: ptarg, pcoll, or any cost name of the MDP.
ObjectiveSpec make_objectives(const std::vector<std::string>& names, const BeliefMdp& mdp);

/// Per state, a distribution over that state's actions (by index).
struct Policy {
  std::vector<std::vector<double>> probs;
};

void validate_policy(const BeliefMdp& mdp, const Policy& pi);

Policy deterministic_policy(const BeliefMdp& mdp, const std::vector<int>& choice);

/// Policy taking the first action whose label matches, falling back to the
/// lowest action index.
Policy label_policy(const BeliefMdp& mdp, const std::string& label);

/// Per-state values of every objective under pi, indexed [state][objective].
std::vector<std::vector<double>> state_values(const BeliefMdp& mdp, const Policy& pi, const ObjectiveSpec& obj);

std::vector<double> evaluate_policy(const BeliefMdp& mdp, const Policy& pi, const ObjectiveSpec& obj);

struct ChainSample {
  int absorbing_state;
  CostVec cost;
  std::vector<std::pair<int, int>> path;  // (state, action index)
};

ChainSample simulate_chain(const BeliefMdp& mdp, const Policy& pi, Rng& rng);

nlohmann::json mdp_to_json(const BeliefMdp& mdp);
BeliefMdp mdp_from_json(const nlohmann::json& j);

nlohmann::json policy_to_json(const BeliefMdp& mdp, const Policy& pi);
Policy policy_from_json(const BeliefMdp& mdp, const nlohmann::json& j);

}  // namespace locsched
