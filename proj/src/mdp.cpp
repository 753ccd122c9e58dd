#include "locsched/mdp.hpp"

#include <cmath>
#include <deque>

namespace locsched {

using nlohmann::json;

int BeliefMdp::num_state_actions() const {
  int n = 0;
  for (const auto& a : actions) n += static_cast<int>(a.size());
  return n;
}

int BeliefMdp::find_state(const std::string& id) const {
  for (int s = 0; s < num_states(); ++s) {
    if (states[static_cast<std::size_t>(s)].id == id) return s;
  }
  return -1;
}

int BeliefMdp::role_state(StateRole r) const {
  for (int s = 0; s < num_states(); ++s) {
    if (states[static_cast<std::size_t>(s)].role == r) return s;
  }
  return -1;
}

bool BeliefMdp::is_absorbing(int s) const {
  for (const MdpAction& a : actions[static_cast<std::size_t>(s)]) {
    if (a.next.size() != 1 || a.next[0].target != s) return false;
  }
  return true;
}

void validate_mdp(const BeliefMdp& mdp, double tol) {
  const int ns = mdp.num_states();
  if (ns == 0) throw StructuralError("MDP has no states");
  if (static_cast<int>(mdp.actions.size()) != ns) throw StructuralError("action table size mismatch");
  if (mdp.initial < 0 || mdp.initial >= ns) throw StructuralError("initial state out of range");
  for (int s = 0; s < ns; ++s) {
    const auto& acts = mdp.actions[static_cast<std::size_t>(s)];
    const std::string& id = mdp.states[static_cast<std::size_t>(s)].id;
    if (acts.empty()) throw StructuralError("state " + id + " has no actions");
    for (const MdpAction& a : acts) {
      if (a.cost.size() != mdp.cost_names.size()) throw StructuralError("state " + id + ": cost vector length mismatch");
      for (double c : a.cost) {
        if (!(c >= 0.0) || !std::isfinite(c)) throw StructuralError("state " + id + ": negative or non-finite cost");
      }
      double sum = 0.0;
      for (const Transition& t : a.next) {
        if (t.target < 0 || t.target >= ns) throw StructuralError("state " + id + ": transition target out of range");
        if (!(t.prob >= 0.0)) throw StructuralError("state " + id + ": negative probability");
        sum += t.prob;
      }
      if (std::abs(sum - 1.0) > tol) {
        throw StructuralError("state " + id + " action " + a.label + ": probabilities sum to " + std::to_string(sum));
      }
    }
  }
}

std::vector<int> topological_order(const BeliefMdp& mdp) {
  const int ns = mdp.num_states();
  std::vector<int> indeg(static_cast<std::size_t>(ns), 0);
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(ns));
  for (int s = 0; s < ns; ++s) {
    if (mdp.is_absorbing(s)) continue;
    for (const MdpAction& a : mdp.actions[static_cast<std::size_t>(s)]) {
      for (const Transition& t : a.next) {
        if (t.prob <= 0.0) continue;
        succ[static_cast<std::size_t>(s)].push_back(t.target);
        ++indeg[static_cast<std::size_t>(t.target)];
      }
    }
  }
  std::deque<int> ready;
  for (int s = 0; s < ns; ++s) {
    if (indeg[static_cast<std::size_t>(s)] == 0) ready.push_back(s);
  }
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(ns));
  while (!ready.empty()) {
    const int s = ready.front();
    ready.pop_front();
    order.push_back(s);
    for (int t : succ[static_cast<std::size_t>(s)]) {
      if (--indeg[static_cast<std::size_t>(t)] == 0) ready.push_back(t);
    }
  }
  if (static_cast<int>(order.size()) != ns) throw UnsupportedStructure("MDP contains a cycle outside absorbing states");
  return order;
}

ObjectiveSpec make_objectives(const std::vector<std::string>& names, const BeliefMdp& mdp) {
  ObjectiveSpec out;
  for (const std::string& n : names) {
    if (n == "ptarg") {
      out.push_back({Objective::Kind::ReachTarg, -1, n});
    } else if (n == "pcoll") {
      out.push_back({Objective::Kind::ReachColl, -1, n});
    } else {
      int idx = -1;
      for (std::size_t k = 0; k < mdp.cost_names.size(); ++k) {
        if (mdp.cost_names[k] == n) idx = static_cast<int>(k);
      }
      if (idx < 0) throw InvalidInput("unknown objective '" + n + "'");
      out.push_back({Objective::Kind::TotalCost, idx, n});
    }
  }
  if (out.empty()) throw InvalidInput("no objectives given");
  for (std::size_t a = 0; a < out.size(); ++a) {
    for (std::size_t b = a + 1; b < out.size(); ++b) {
      if (out[a].name == out[b].name) throw InvalidInput("objective '" + out[a].name + "' listed twice");
    }
  }
  return out;
}

void validate_policy(const BeliefMdp& mdp, const Policy& pi) {
  if (static_cast<int>(pi.probs.size()) != mdp.num_states()) throw InvalidPolicy("policy covers the wrong number of states");
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto& p = pi.probs[static_cast<std::size_t>(s)];
    if (p.size() != mdp.actions[static_cast<std::size_t>(s)].size()) {
      throw InvalidPolicy("policy support at " + mdp.states[static_cast<std::size_t>(s)].id +
                          " does not match the available actions");
    }
    double sum = 0.0;
    for (double q : p) {
      if (!(q >= 0.0)) throw InvalidPolicy("negative probability in policy");
      sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw InvalidPolicy("policy distribution at " + mdp.states[static_cast<std::size_t>(s)].id + " does not sum to 1");
    }
  }
}

Policy deterministic_policy(const BeliefMdp& mdp, const std::vector<int>& choice) {
  Policy pi;
  pi.probs.resize(static_cast<std::size_t>(mdp.num_states()));
  for (int s = 0; s < mdp.num_states(); ++s) {
    auto& p = pi.probs[static_cast<std::size_t>(s)];
    p.assign(mdp.actions[static_cast<std::size_t>(s)].size(), 0.0);
    const int c = choice.at(static_cast<std::size_t>(s));
    if (c < 0 || c >= static_cast<int>(p.size())) throw InvalidPolicy("action index out of range");
    p[static_cast<std::size_t>(c)] = 1.0;
  }
  return pi;
}

Policy label_policy(const BeliefMdp& mdp, const std::string& label) {
  std::vector<int> choice(static_cast<std::size_t>(mdp.num_states()), 0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto& acts = mdp.actions[static_cast<std::size_t>(s)];
    for (std::size_t a = 0; a < acts.size(); ++a) {
      if (acts[a].label == label) {
        choice[static_cast<std::size_t>(s)] = static_cast<int>(a);
        break;
      }
    }
  }
  return deterministic_policy(mdp, choice);
}

std::vector<std::vector<double>> state_values(const BeliefMdp& mdp, const Policy& pi, const ObjectiveSpec& obj) {
  validate_policy(mdp, pi);
  const std::vector<int> order = topological_order(mdp);
  const std::size_t k = obj.size();
  std::vector<std::vector<double>> v(static_cast<std::size_t>(mdp.num_states()), std::vector<double>(k, 0.0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int s = *it;
    auto& vs = v[static_cast<std::size_t>(s)];
    if (mdp.is_absorbing(s)) {
      const StateRole role = mdp.states[static_cast<std::size_t>(s)].role;
      for (std::size_t o = 0; o < k; ++o) {
        if (obj[o].kind == Objective::Kind::ReachTarg) vs[o] = role == StateRole::Targ ? 1.0 : 0.0;
        if (obj[o].kind == Objective::Kind::ReachColl) vs[o] = role == StateRole::Coll ? 1.0 : 0.0;
      }
      continue;
    }
    const auto& acts = mdp.actions[static_cast<std::size_t>(s)];
    const auto& p = pi.probs[static_cast<std::size_t>(s)];
    for (std::size_t a = 0; a < acts.size(); ++a) {
      if (p[a] == 0.0) continue;
      for (std::size_t o = 0; o < k; ++o) {
        double q = obj[o].kind == Objective::Kind::TotalCost ? acts[a].cost[static_cast<std::size_t>(obj[o].cost_index)]
                                                             : 0.0;
        for (const Transition& t : acts[a].next) q += t.prob * v[static_cast<std::size_t>(t.target)][o];
        vs[o] += p[a] * q;
      }
    }
  }
  return v;
}

std::vector<double> evaluate_policy(const BeliefMdp& mdp, const Policy& pi, const ObjectiveSpec& obj) {
  return state_values(mdp, pi, obj)[static_cast<std::size_t>(mdp.initial)];
}

ChainSample simulate_chain(const BeliefMdp& mdp, const Policy& pi, Rng& rng) {
  validate_policy(mdp, pi);
  ChainSample out;
  out.cost.assign(mdp.cost_names.size(), 0.0);
  int s = mdp.initial;
  const std::size_t limit = static_cast<std::size_t>(mdp.num_states()) + 1;
  while (!mdp.is_absorbing(s)) {
    if (out.path.size() >= limit) throw StructuralError("chain path exceeds |S| + 1 steps");
    const auto& p = pi.probs[static_cast<std::size_t>(s)];
    double r = uniform01(rng);
    std::size_t a = 0;
    for (; a + 1 < p.size(); ++a) {
      if (r < p[a]) break;
      r -= p[a];
    }
    while (p[a] == 0.0 && a > 0) --a;
    const MdpAction& act = mdp.actions[static_cast<std::size_t>(s)][a];
    out.path.emplace_back(s, static_cast<int>(a));
    for (std::size_t c = 0; c < out.cost.size(); ++c) out.cost[c] += act.cost[c];
    double u = uniform01(rng);
    int next = act.next.back().target;
    for (const Transition& t : act.next) {
      if (u < t.prob) {
        next = t.target;
        break;
      }
      u -= t.prob;
    }
    s = next;
  }
  out.absorbing_state = s;
  return out;
}

namespace {

const char* role_name(StateRole r) {
  switch (r) {
    case StateRole::Node:
      return "node";
    case StateRole::Coll:
      return "coll";
    case StateRole::Targ:
      return "targ";
    case StateRole::Free:
      return "free";
  }
  return "node";
}

StateRole role_from(const std::string& s) {
  if (s == "node") return StateRole::Node;
  if (s == "coll") return StateRole::Coll;
  if (s == "targ") return StateRole::Targ;
  if (s == "free") return StateRole::Free;
  throw InvalidInput("unknown state role '" + s + "'");
}

}  // namespace

json mdp_to_json(const BeliefMdp& mdp) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "belief_mdp";
  j["provenance"] = mdp.provenance;
  j["cost_names"] = mdp.cost_names;
  j["initial"] = mdp.states[static_cast<std::size_t>(mdp.initial)].id;
  j["num_states"] = mdp.num_states();
  j["num_state_actions"] = mdp.num_state_actions();
  j["boot_time"] = mdp.boot_time;
  j["nominal_durations"] = mdp.nominal_durations;
  json states = json::array();
  for (int s = 0; s < mdp.num_states(); ++s) {
    const MdpState& st = mdp.states[static_cast<std::size_t>(s)];
    json js;
    js["id"] = st.id;
    js["role"] = role_name(st.role);
    if (st.role == StateRole::Node) {
      js["i"] = st.i;
      js["j"] = st.j;
    }
    json acts = json::array();
    for (const MdpAction& a : mdp.actions[static_cast<std::size_t>(s)]) {
      json ja;
      ja["label"] = a.label;
      ja["cost"] = a.cost;
      json next = json::array();
      for (const Transition& t : a.next) next.push_back({mdp.states[static_cast<std::size_t>(t.target)].id, t.prob});
      ja["next"] = next;
      acts.push_back(ja);
    }
    js["actions"] = acts;
    states.push_back(js);
  }
  j["states"] = states;
  return j;
}

BeliefMdp mdp_from_json(const json& j) {
  try {
    if (j.at("format_version").get<int>() != 1) throw InvalidInput("unsupported MDP format_version");
    if (j.value("kind", std::string()) != "belief_mdp") throw InvalidInput("document is not a belief MDP");
    BeliefMdp mdp;
    mdp.cost_names = j.at("cost_names").get<std::vector<std::string>>();
    mdp.boot_time = j.value("boot_time", 0.0);
    mdp.nominal_durations = j.value("nominal_durations", std::vector<double>{});
    mdp.provenance = j.value("provenance", json::object());
    const json& states = j.at("states");
    std::unordered_map<std::string, int> index;
    for (const json& js : states) {
      MdpState st;
      st.id = js.at("id").get<std::string>();
      st.role = role_from(js.at("role").get<std::string>());
      st.i = js.value("i", -1);
      st.j = js.value("j", -1);
      if (index.count(st.id)) throw InvalidInput("duplicate state id " + st.id);
      index[st.id] = static_cast<int>(mdp.states.size());
      mdp.states.push_back(st);
    }
    for (const json& js : states) {
      std::vector<MdpAction> acts;
      for (const json& ja : js.at("actions")) {
        MdpAction a;
        a.label = ja.at("label").get<std::string>();
        a.cost = ja.at("cost").get<CostVec>();
        for (const json& t : ja.at("next")) {
          const auto id = t.at(0).get<std::string>();
          auto it = index.find(id);
          if (it == index.end()) throw InvalidInput("transition to unknown state " + id);
          a.next.push_back({it->second, t.at(1).get<double>()});
        }
        acts.push_back(std::move(a));
      }
      mdp.actions.push_back(std::move(acts));
    }
    const auto init = index.find(j.at("initial").get<std::string>());
    if (init == index.end()) throw InvalidInput("unknown initial state");
    mdp.initial = init->second;
    validate_mdp(mdp, 1e-9);
    return mdp;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed MDP document: ") + e.what());
  }
}

json policy_to_json(const BeliefMdp& mdp, const Policy& pi) {
  json j = json::object();
  for (int s = 0; s < mdp.num_states(); ++s) {
    if (mdp.is_absorbing(s)) continue;
    json d = json::object();
    const auto& acts = mdp.actions[static_cast<std::size_t>(s)];
    for (std::size_t a = 0; a < acts.size(); ++a) {
      const double p = pi.probs[static_cast<std::size_t>(s)][a];
      if (p > 0.0) d[acts[a].label] = p;
    }
    j[mdp.states[static_cast<std::size_t>(s)].id] = d;
  }
  return j;
}

Policy policy_from_json(const BeliefMdp& mdp, const json& j) {
  Policy pi;
  pi.probs.resize(static_cast<std::size_t>(mdp.num_states()));
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto& acts = mdp.actions[static_cast<std::size_t>(s)];
    auto& p = pi.probs[static_cast<std::size_t>(s)];
    p.assign(acts.size(), 0.0);
    const std::string& id = mdp.states[static_cast<std::size_t>(s)].id;
    if (!j.contains(id)) {
      if (!mdp.is_absorbing(s)) throw InvalidPolicy("policy has no entry for state " + id);
      p[0] = 1.0;
      continue;
    }
    for (const auto& [label, prob] : j.at(id).items()) {
      std::size_t a = 0;
      while (a < acts.size() && acts[a].label != label) ++a;
      if (a == acts.size()) throw InvalidPolicy("action '" + label + "' is not available at state " + id);
      p[a] = prob.get<double>();
    }
  }
  validate_policy(mdp, pi);
  return pi;
}

}  // namespace locsched
