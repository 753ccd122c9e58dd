#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls the library's evaluators or the
// front builder; only the LP solver is reused.

#include "locsched/mdp.hpp"
#include "locsched/pareto.hpp"
#include "locsched/rng.hpp"
#include "locsched/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using namespace locsched;

/// Random acyclic MDP: `nodes` decision states in index order, then targ and
/// coll absorbing states. Every node has 1 or 2 actions moving to later
/// nodes or to the absorbing states. Two cost channels c0, c1 in [0, 1).
inline BeliefMdp random_dag(Rng& rng, int nodes) {
  BeliefMdp m;
  const int targ = nodes, coll = nodes + 1;
  for (int s = 0; s < nodes; ++s) m.states.push_back({"n" + std::to_string(s), StateRole::Node, s, 0});
  m.states.push_back({"targ", StateRole::Targ});
  m.states.push_back({"coll", StateRole::Coll});
  m.cost_names = {"c0", "c1"};
  m.actions.resize(static_cast<std::size_t>(nodes + 2));
  std::uniform_int_distribution<int> n_act(1, 2);
  for (int s = 0; s < nodes; ++s) {
    const int na = n_act(rng);
    for (int a = 0; a < na; ++a) {
      std::vector<int> succ;
      for (int t = s + 1; t < nodes + 2; ++t) {
        if (uniform01(rng) < 0.6) succ.push_back(t);
      }
      if (succ.empty()) succ.push_back(uniform01(rng) < 0.5 ? targ : coll);
      std::vector<double> w;
      double sum = 0.0;
      for (std::size_t k = 0; k < succ.size(); ++k) {
        w.push_back(0.05 + uniform01(rng));
        sum += w.back();
      }
      MdpAction act;
      act.label = "a" + std::to_string(a);
      for (std::size_t k = 0; k < succ.size(); ++k) act.next.push_back({succ[k], w[k] / sum});
      act.cost = {uniform01(rng), uniform01(rng)};
      m.actions[static_cast<std::size_t>(s)].push_back(act);
    }
  }
  m.actions[static_cast<std::size_t>(targ)] = {{"stay", {{targ, 1.0}}, {0.0, 0.0}}};
  m.actions[static_cast<std::size_t>(coll)] = {{"stay", {{coll, 1.0}}, {0.0, 0.0}}};
  m.nominal_durations = {0.0};
  return m;
}

/// Expected objective values from `s` under a randomized stationary policy,
/// by memoized recursion. Assumes the non-absorbing part is acyclic.
inline std::vector<double> values_from(const BeliefMdp& m, const Policy& pi, const ObjectiveSpec& obj) {
  const int ns = m.num_states();
  const std::size_t d = obj.size();
  std::vector<std::vector<double>> memo(static_cast<std::size_t>(ns));
  std::function<const std::vector<double>&(int)> rec = [&](int s) -> const std::vector<double>& {
    auto& slot = memo[static_cast<std::size_t>(s)];
    if (!slot.empty()) return slot;
    std::vector<double> v(d, 0.0);
    const StateRole role = m.states[static_cast<std::size_t>(s)].role;
    bool absorbing = true;
    for (const auto& a : m.actions[static_cast<std::size_t>(s)]) {
      if (a.next.size() != 1 || a.next[0].target != s) absorbing = false;
    }
    if (absorbing) {
      for (std::size_t k = 0; k < d; ++k) {
        if (obj[k].kind == Objective::Kind::ReachTarg && role == StateRole::Targ) v[k] = 1.0;
        if (obj[k].kind == Objective::Kind::ReachColl && role == StateRole::Coll) v[k] = 1.0;
      }
    } else {
      const auto& acts = m.actions[static_cast<std::size_t>(s)];
      for (std::size_t a = 0; a < acts.size(); ++a) {
        const double pa = pi.probs[static_cast<std::size_t>(s)][a];
        if (pa == 0.0) continue;
        for (std::size_t k = 0; k < d; ++k) {
          if (obj[k].kind == Objective::Kind::TotalCost) v[k] += pa * acts[a].cost[static_cast<std::size_t>(obj[k].cost_index)];
        }
        for (const Transition& t : acts[a].next) {
          const std::vector<double>& sub = rec(t.target);
          for (std::size_t k = 0; k < d; ++k) v[k] += pa * t.prob * sub[k];
        }
      }
    }
    slot = v;
    return slot;
  };
  return rec(m.initial);
}

/// Value vectors of every deterministic policy (odometer enumeration).
inline std::vector<std::vector<double>> enumerate_deterministic(const BeliefMdp& m, const ObjectiveSpec& obj) {
  const int ns = m.num_states();
  std::vector<int> choice(static_cast<std::size_t>(ns), 0);
  std::vector<std::vector<double>> out;
  while (true) {
    Policy pi;
    for (int s = 0; s < ns; ++s) {
      std::vector<double> row(m.actions[static_cast<std::size_t>(s)].size(), 0.0);
      row[static_cast<std::size_t>(choice[static_cast<std::size_t>(s)])] = 1.0;
      pi.probs.push_back(row);
    }
    out.push_back(values_from(m, pi, obj));
    int s = 0;
    while (s < ns) {
      auto& c = choice[static_cast<std::size_t>(s)];
      if (++c < static_cast<int>(m.actions[static_cast<std::size_t>(s)].size())) break;
      c = 0;
      ++s;
    }
    if (s == ns) break;
  }
  return out;
}

inline std::vector<double> orient(const std::vector<double>& v, const ObjectiveSpec& obj) {
  std::vector<double> o(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) o[k] = obj[k].maximize() ? v[k] : -v[k];
  return o;
}

/// Largest t with p + t*1 <= some convex combination of `pts` (all-maximize).
/// Negative t means p sticks out of the dominated hull by -t.
inline double dominance_margin(const std::vector<std::vector<double>>& pts, const std::vector<double>& p) {
  const int k = static_cast<int>(pts.size());
  const int d = static_cast<int>(p.size());
  // variables: lambda_0..k-1, t+, t-
  LinearProgram lp;
  lp.n = k + 2;
  lp.c.assign(static_cast<std::size_t>(lp.n), 0.0);
  lp.c[static_cast<std::size_t>(k)] = -1.0;
  lp.c[static_cast<std::size_t>(k + 1)] = 1.0;
  for (int j = 0; j < d; ++j) {
    std::vector<double> a(static_cast<std::size_t>(lp.n), 0.0);
    for (int i = 0; i < k; ++i) a[static_cast<std::size_t>(i)] = pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    a[static_cast<std::size_t>(k)] = -1.0;
    a[static_cast<std::size_t>(k + 1)] = 1.0;
    lp.add_row(a, Sense::Ge, p[static_cast<std::size_t>(j)]);
  }
  std::vector<double> one(static_cast<std::size_t>(lp.n), 0.0);
  for (int i = 0; i < k; ++i) one[static_cast<std::size_t>(i)] = 1.0;
  lp.add_row(one, Sense::Eq, 1.0);
  // keep t bounded so the LP is never unbounded
  std::vector<double> cap(static_cast<std::size_t>(lp.n), 0.0);
  cap[static_cast<std::size_t>(k)] = 1.0;
  lp.add_row(cap, Sense::Le, 1e3);
  const LpResult r = solve_lp(lp);
  if (r.status != LpStatus::Optimal) return -1e300;
  return r.x[static_cast<std::size_t>(k)] - r.x[static_cast<std::size_t>(k + 1)];
}

/// Total slack by which p is dominated by a convex combination of `pts`.
inline double dominated_slack(const std::vector<std::vector<double>>& pts, const std::vector<double>& p) {
  if (pts.empty()) return 0.0;
  const int k = static_cast<int>(pts.size());
  const int d = static_cast<int>(p.size());
  LinearProgram lp;
  lp.n = k + d;
  lp.c.assign(static_cast<std::size_t>(lp.n), 0.0);
  for (int j = 0; j < d; ++j) lp.c[static_cast<std::size_t>(k + j)] = -1.0;
  for (int j = 0; j < d; ++j) {
    std::vector<double> a(static_cast<std::size_t>(lp.n), 0.0);
    for (int i = 0; i < k; ++i) a[static_cast<std::size_t>(i)] = pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    a[static_cast<std::size_t>(k + j)] = -1.0;
    lp.add_row(a, Sense::Eq, p[static_cast<std::size_t>(j)]);
  }
  std::vector<double> one(static_cast<std::size_t>(lp.n), 0.0);
  for (int i = 0; i < k; ++i) one[static_cast<std::size_t>(i)] = 1.0;
  lp.add_row(one, Sense::Eq, 1.0);
  const LpResult r = solve_lp(lp);
  if (r.status != LpStatus::Optimal) return 0.0;
  return -r.objective;
}

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

struct FrontCheck {
  double unsupported = 0.0;  // front vertex farthest from any enumerated value
  double missing = 0.0;      // enumerated value farthest outside the front's dominated hull
  double redundant = 0.0;    // largest slack by which a front vertex is dominated by the enumeration
  double worst() const { return std::max({unsupported, missing, redundant}); }
};

/// Compares a computed front with the brute-force enumeration. All three
/// numbers are zero exactly when the front's vertices are the non-dominated
/// extreme points of the enumerated hull, so worst() bounds the Hausdorff
/// distance between the two Pareto surfaces.
inline FrontCheck check_front(const ParetoFront& front, const std::vector<std::vector<double>>& enumerated) {
  const ObjectiveSpec& obj = front.objectives;
  FrontCheck c;
  std::vector<std::vector<double>> fv, ev;
  for (const auto& v : front.vertices) fv.push_back(orient(v.value, obj));
  for (const auto& v : enumerated) ev.push_back(orient(v, obj));
  for (const auto& v : fv) {
    double best = 1e300;
    for (const auto& e : ev) best = std::min(best, dist(v, e));
    c.unsupported = std::max(c.unsupported, best);
  }
  for (const auto& e : ev) c.missing = std::max(c.missing, -dominance_margin(fv, e));
  for (const auto& v : fv) {
    std::vector<std::vector<double>> others;
    for (const auto& e : ev) {
      if (dist(e, v) > 1e-9) others.push_back(e);
    }
    c.redundant = std::max(c.redundant, dominated_slack(others, v));
  }
  return c;
}

}  // namespace oracle
