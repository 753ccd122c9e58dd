#include "locsched/pareto.hpp"

#include "locsched/simplex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace locsched {

namespace {

double orient(const Objective& o) { return o.maximize() ? 1.0 : -1.0; }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

ScalarizedSolution scalarize_solve(const BeliefMdp& mdp, const ObjectiveSpec& obj, const std::vector<double>& weights) {
  if (weights.size() != obj.size()) throw InvalidInput("weight vector length does not match the objectives");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidInput("weights must be nonnegative");
    wsum += w;
  }
  if (wsum <= 0.0) throw InvalidInput("weights must not all be zero");
  const std::vector<int> order = topological_order(mdp);
  const int ns = mdp.num_states();
  std::vector<double> v(static_cast<std::size_t>(ns), 0.0);
  std::vector<int> choice(static_cast<std::size_t>(ns), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int s = *it;
    const auto us = static_cast<std::size_t>(s);
    if (mdp.is_absorbing(s)) {
      const StateRole role = mdp.states[us].role;
      for (std::size_t k = 0; k < obj.size(); ++k) {
        if (obj[k].kind == Objective::Kind::ReachTarg && role == StateRole::Targ) v[us] += weights[k];
        if (obj[k].kind == Objective::Kind::ReachColl && role == StateRole::Coll) v[us] -= weights[k];
      }
      continue;
    }
    const auto& acts = mdp.actions[us];
    double best = 0.0;
    for (std::size_t a = 0; a < acts.size(); ++a) {
      double q = 0.0;
      for (std::size_t k = 0; k < obj.size(); ++k) {
        if (obj[k].kind == Objective::Kind::TotalCost) {
          q -= weights[k] * acts[a].cost[static_cast<std::size_t>(obj[k].cost_index)];
        }
      }
      for (const Transition& t : acts[a].next) q += t.prob * v[static_cast<std::size_t>(t.target)];
      if (a == 0 || q > best + 1e-12 * std::max(1.0, std::abs(best))) {
        best = q;
        choice[us] = static_cast<int>(a);
      }
    }
    v[us] = best;
  }
  ScalarizedSolution out;
  out.choice = choice;
  out.value = evaluate_policy(mdp, deterministic_policy(mdp, choice), obj);
  return out;
}

std::vector<int> nondominated_hull_filter(const std::vector<std::vector<double>>& pts, double tol) {
  const int n = static_cast<int>(pts.size());
  std::vector<char> alive(static_cast<std::size_t>(n), 1);
  for (int i = 0; i < n; ++i) {
    std::vector<int> others;
    for (int j = 0; j < n; ++j) {
      if (j != i && alive[static_cast<std::size_t>(j)]) others.push_back(j);
    }
    if (others.empty()) continue;
    const std::size_t d = pts[static_cast<std::size_t>(i)].size();
    LinearProgram lp;
    lp.n = static_cast<int>(others.size());
    lp.c.assign(others.size(), 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<double> a(others.size());
      for (std::size_t q = 0; q < others.size(); ++q) a[q] = pts[static_cast<std::size_t>(others[q])][k];
      lp.add_row(std::move(a), Sense::Ge, pts[static_cast<std::size_t>(i)][k] - tol);
    }
    lp.add_row(std::vector<double>(others.size(), 1.0), Sense::Eq, 1.0);
    if (solve_lp(lp).status == LpStatus::Optimal) alive[static_cast<std::size_t>(i)] = 0;
  }
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (alive[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

namespace {

struct FrontBuilder {
  const BeliefMdp& mdp;
  const ObjectiveSpec& obj;
  const FrontOptions& opt;
  std::size_t d;
  std::vector<double> scale;
  std::vector<std::vector<double>> pts;  // oriented, normalized
  std::vector<FrontVertex> raw;
  std::vector<SupportingWeight> facets;
  int queries = 0;

  FrontBuilder(const BeliefMdp& m, const ObjectiveSpec& o, const FrontOptions& op)
      : mdp(m), obj(o), opt(op), d(o.size()), scale(o.size(), 1.0) {}

  std::vector<double> to_oriented(const std::vector<double>& v) const {
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = orient(obj[k]) * v[k] / scale[k];
    return x;
  }

  // Queries the scalarized problem at a normalized weight, nudged into the
  // interior so that weakly dominated optima are not returned.
  std::vector<double> query(const std::vector<double>& w) {
    constexpr double kDelta = 1e-7;
    std::vector<double> natural(d);
    std::vector<double> wi(d);
    for (std::size_t k = 0; k < d; ++k) {
      wi[k] = (1.0 - kDelta) * w[k] + kDelta / static_cast<double>(d);
      natural[k] = wi[k] / scale[k];
    }
    ScalarizedSolution sol = scalarize_solve(mdp, obj, natural);
    ++queries;
    std::vector<double> x = to_oriented(sol.value);
    facets.push_back({wi, dot(wi, x)});
    add_point(sol.value, sol.choice);
    return x;
  }

  bool add_point(const std::vector<double>& value, const std::vector<int>& choice) {
    for (const FrontVertex& v : raw) {
      bool same = true;
      for (std::size_t k = 0; k < d && same; ++k) {
        same = std::abs(v.value[k] - value[k]) <= 1e-9 * std::max(1.0, std::abs(value[k]));
      }
      if (same) return false;
    }
    raw.push_back({value, choice});
    pts.push_back(to_oriented(value));
    return true;
  }

  double envelope(const std::vector<double>& w) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) best = std::max(best, dot(w, p));
    return best;
  }

  void prune() {
    const std::vector<int> keep = nondominated_hull_filter(pts, 1e-12);
    std::vector<std::vector<double>> p2;
    std::vector<FrontVertex> r2;
    for (int i : keep) {
      p2.push_back(pts[static_cast<std::size_t>(i)]);
      r2.push_back(raw[static_cast<std::size_t>(i)]);
    }
    pts.swap(p2);
    raw.swap(r2);
  }

  // Vertices of {(w, u) : w in the simplex, u >= w.p for every point}.
  std::vector<std::vector<double>> envelope_vertices() const {
    const int np = static_cast<int>(pts.size());
    const int nc = np + static_cast<int>(d);  // point equalities, then w_k = 0
    const int dim = static_cast<int>(d) + 1;
    std::vector<std::vector<double>> out;
    std::vector<int> pick(d);
    std::function<void(int, int)> rec = [&](int start, int depth) {
      if (depth == static_cast<int>(d)) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
        for (std::size_t k = 0; k < d; ++k) a(0, static_cast<Eigen::Index>(k)) = 1.0;
        b(0) = 1.0;
        for (int r = 0; r < static_cast<int>(d); ++r) {
          const int c = pick[static_cast<std::size_t>(r)];
          if (c < np) {
            for (std::size_t k = 0; k < d; ++k) a(r + 1, static_cast<Eigen::Index>(k)) = pts[static_cast<std::size_t>(c)][k];
            a(r + 1, dim - 1) = -1.0;
          } else {
            a(r + 1, c - np) = 1.0;
          }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (lu.rank() < dim) return;
        const Eigen::VectorXd sol = lu.solve(b);
        std::vector<double> w(d);
        for (std::size_t k = 0; k < d; ++k) {
          if (sol(static_cast<Eigen::Index>(k)) < -1e-12) return;
          w[k] = std::max(0.0, sol(static_cast<Eigen::Index>(k)));
        }
        const double u = sol(dim - 1);
        for (const auto& p : pts) {
          if (dot(w, p) > u + 1e-10) return;
        }
        for (const auto& q : out) {
          double diff = 0.0;
          for (std::size_t k = 0; k < d; ++k) diff = std::max(diff, std::abs(q[k] - w[k]));
          if (diff < 1e-10) return;
        }
        out.push_back(w);
        return;
      }
      for (int c = start; c < nc; ++c) {
        pick[static_cast<std::size_t>(depth)] = c;
        rec(c + 1, depth + 1);
      }
    };
    rec(0, 0);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Upper bound on max w.x over achievable x from the recorded supporting hyperplanes.
  double outer_bound(const std::vector<double>& w, const std::vector<double>& upper) const {
    LinearProgram lp;
    // x = xp - xn, both nonnegative.
    lp.n = static_cast<int>(2 * d);
    lp.c.assign(2 * d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      lp.c[k] = -w[k];
      lp.c[d + k] = w[k];
    }
    for (const SupportingWeight& f : facets) {
      std::vector<double> a(2 * d);
      for (std::size_t k = 0; k < d; ++k) {
        a[k] = f.weight[k];
        a[d + k] = -f.weight[k];
      }
      lp.add_row(a, Sense::Le, f.support);
    }
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<double> a(2 * d, 0.0);
      a[k] = 1.0;
      a[d + k] = -1.0;
      lp.add_row(a, Sense::Le, upper[k]);
    }
    const LpResult r = solve_lp(lp);
    if (r.status != LpStatus::Optimal) return std::numeric_limits<double>::infinity();
    return -r.objective;
  }
};

std::vector<std::vector<double>> simplex_grid(std::size_t d, int count, double offset) {
  // Low-discrepancy Kronecker sequence in the unit cube mapped onto the
  // simplex through sorted spacings.
  double phi = 2.0;
  for (int it = 0; it < 50; ++it) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(d));
  std::vector<double> alpha(d - 1);
  for (std::size_t k = 0; k < d - 1; ++k) alpha[k] = std::fmod(std::pow(1.0 / phi, static_cast<double>(k + 1)), 1.0);
  std::vector<std::vector<double>> out;
  for (int q = 0; q < count; ++q) {
    std::vector<double> u(d - 1);
    for (std::size_t k = 0; k < d - 1; ++k) u[k] = std::fmod(offset + alpha[k] * (q + 1), 1.0);
    std::sort(u.begin(), u.end());
    std::vector<double> w(d);
    double prev = 0.0;
    for (std::size_t k = 0; k < d - 1; ++k) {
      w[k] = u[k] - prev;
      prev = u[k];
    }
    w[d - 1] = 1.0 - prev;
    out.push_back(w);
  }
  return out;
}

}  // namespace

ParetoFront compute_front(const BeliefMdp& mdp, const ObjectiveSpec& obj, const FrontOptions& opt) {
  const std::size_t d = obj.size();
  if (d < 2 || d > 4) throw InvalidInput("between two and four objectives are required");
  topological_order(mdp);
  FrontBuilder fb(mdp, obj, opt);

  // Corner queries, first unscaled to estimate magnitudes, then normalized.
  std::vector<std::vector<double>> corner_vals;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> w(d, 0.0);
    w[k] = 1.0;
    corner_vals.push_back(fb.query(w));
  }
  for (std::size_t k = 0; k < d; ++k) {
    double mag = 0.0;
    for (const auto& v : corner_vals) mag = std::max(mag, std::abs(v[k]));
    fb.scale[k] = mag > 1e-12 ? mag : 1.0;
  }
  fb.pts.clear();
  for (const FrontVertex& v : fb.raw) fb.pts.push_back(fb.to_oriented(v.value));
  fb.facets.clear();
  std::vector<double> upper(d, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> w(d, 0.0);
    w[k] = 1.0;
    const std::vector<double> x = fb.query(w);
    upper[k] = x[k];
  }
  // Range-based rescale keeps the weight simplex well conditioned.
  {
    std::vector<double> range(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& p : fb.pts) {
        lo = std::min(lo, p[k]);
        hi = std::max(hi, p[k]);
      }
      range[k] = hi - lo;
    }
    for (std::size_t k = 0; k < d; ++k) {
      if (range[k] > 1e-9) fb.scale[k] *= range[k];
    }
    fb.pts.clear();
    for (const FrontVertex& v : fb.raw) fb.pts.push_back(fb.to_oriented(v.value));
    fb.facets.clear();
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<double> w(d, 0.0);
      w[k] = 1.0;
      const std::vector<double> x = fb.query(w);
      upper[k] = x[k] + 1e-6;
    }
  }

  double gap = 0.0;
  if (d <= 3) {
    std::vector<std::vector<double>> done;
    auto was_done = [&](const std::vector<double>& w) {
      for (const auto& q : done) {
        double diff = 0.0;
        for (std::size_t k = 0; k < d; ++k) diff = std::max(diff, std::abs(q[k] - w[k]));
        if (diff < 1e-10) return true;
      }
      return false;
    };
    while (true) {
      fb.prune();
      const auto verts = fb.envelope_vertices();
      bool added = false;
      bool exhausted = false;
      gap = 0.0;
      for (const auto& w : verts) {
        if (was_done(w)) continue;
        if (fb.queries >= opt.max_queries) {
          exhausted = true;
          gap = std::max(gap, fb.outer_bound(w, upper) - fb.envelope(w));
          continue;
        }
        const double before = fb.envelope(w);
        const std::vector<double> x = fb.query(w);
        done.push_back(w);
        const double impr = dot(w, x) - before;
        if (impr > opt.gap_tol) added = true;
        gap = std::max(gap, std::max(0.0, impr));
      }
      if (!added || exhausted) break;
    }
  } else {
    for (const auto& w : simplex_grid(d, opt.grid_weights, 0.0)) {
      if (fb.queries >= opt.max_queries) break;
      fb.query(w);
    }
    fb.prune();
    for (const auto& w : simplex_grid(d, opt.validation_weights, 0.5)) {
      const double before = fb.envelope(w);
      const std::vector<double> x = fb.query(w);
      gap = std::max(gap, dot(w, x) - before);
    }
  }
  fb.prune();

  ParetoFront front;
  front.objectives = obj;
  front.scale = fb.scale;
  front.refinement_gap = std::max(0.0, gap);
  front.queries = fb.queries;
  front.facets = fb.facets;
  std::vector<std::size_t> idx(fb.raw.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fb.pts[a] > fb.pts[b]; });
  for (std::size_t i : idx) front.vertices.push_back(fb.raw[i]);
  return front;
}

TargetPoint parse_point_selector(const std::string& text, const ObjectiveSpec& obj) {
  TargetPoint tp;
  auto find_obj = [&](const std::string& name) {
    for (std::size_t k = 0; k < obj.size(); ++k) {
      if (obj[k].name == name) return static_cast<int>(k);
    }
    throw InvalidInput("objective '" + name + "' is not part of this front");
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  const std::string t = trim(text);
  if (t.rfind("vertex:", 0) == 0) {
    const std::string num = t.substr(7);
    std::size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != num.size() || num.empty() || v < 0) throw InvalidInput("bad vertex selector '" + text + "'");
    tp.vertex = v;
    return tp;
  }
  std::string bounds = t, order;
  if (const auto semi = t.find(';'); semi != std::string::npos) {
    bounds = t.substr(0, semi);
    order = trim(t.substr(semi + 1));
    if (order.rfind("order=", 0) != 0) throw InvalidInput("expected 'order=' after ';' in '" + text + "'");
    order = order.substr(6);
  }
  std::stringstream ss(bounds);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t pos = item.find(">=");
    bool ge = true;
    if (pos == std::string::npos) {
      pos = item.find("<=");
      ge = false;
    }
    if (pos == std::string::npos) throw InvalidInput("bound '" + item + "' needs >= or <=");
    const int k = find_obj(trim(item.substr(0, pos)));
    if (ge != obj[static_cast<std::size_t>(k)].maximize()) {
      throw InvalidInput("bound '" + item + "' points the wrong way for objective " + obj[static_cast<std::size_t>(k)].name);
    }
    const std::string num = trim(item.substr(pos + 2));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size()) throw InvalidInput("bad number in bound '" + item + "'");
    tp.bounds.push_back({k, v});
  }
  if (!order.empty()) {
    std::stringstream os(order);
    while (std::getline(os, item, ',')) {
      item = trim(item);
      if (!item.empty()) tp.optimize_order.push_back(find_obj(item));
    }
  }
  if (tp.bounds.empty()) throw InvalidInput("point selector sets no bounds");
  return tp;
}

namespace {

struct OccupationLp {
  std::vector<std::pair<int, int>> vars;  // (state, action)
  std::vector<std::vector<double>> coef;  // per objective, per variable
  LinearProgram base;
};

OccupationLp occupation_lp(const BeliefMdp& mdp, const ObjectiveSpec& obj) {
  topological_order(mdp);
  OccupationLp o;
  const int ns = mdp.num_states();
  std::vector<int> row_of(static_cast<std::size_t>(ns), -1);
  int rows = 0;
  for (int s = 0; s < ns; ++s) {
    if (mdp.is_absorbing(s)) continue;
    row_of[static_cast<std::size_t>(s)] = rows++;
    for (std::size_t a = 0; a < mdp.actions[static_cast<std::size_t>(s)].size(); ++a) o.vars.emplace_back(s, static_cast<int>(a));
  }
  const int nv = static_cast<int>(o.vars.size());
  o.base.n = nv;
  o.base.c.assign(static_cast<std::size_t>(nv), 0.0);
  std::vector<std::vector<double>> flow(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(nv), 0.0));
  o.coef.assign(obj.size(), std::vector<double>(static_cast<std::size_t>(nv), 0.0));
  for (int v = 0; v < nv; ++v) {
    const auto [s, a] = o.vars[static_cast<std::size_t>(v)];
    const MdpAction& act = mdp.actions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
    flow[static_cast<std::size_t>(row_of[static_cast<std::size_t>(s)])][static_cast<std::size_t>(v)] += 1.0;
    for (const Transition& t : act.next) {
      const int r = row_of[static_cast<std::size_t>(t.target)];
      if (r >= 0) flow[static_cast<std::size_t>(r)][static_cast<std::size_t>(v)] -= t.prob;
      const StateRole role = mdp.states[static_cast<std::size_t>(t.target)].role;
      for (std::size_t k = 0; k < obj.size(); ++k) {
        if (obj[k].kind == Objective::Kind::ReachTarg && role == StateRole::Targ && r < 0) o.coef[k][static_cast<std::size_t>(v)] += t.prob;
        if (obj[k].kind == Objective::Kind::ReachColl && role == StateRole::Coll && r < 0) o.coef[k][static_cast<std::size_t>(v)] += t.prob;
      }
    }
    for (std::size_t k = 0; k < obj.size(); ++k) {
      if (obj[k].kind == Objective::Kind::TotalCost) o.coef[k][static_cast<std::size_t>(v)] = act.cost[static_cast<std::size_t>(obj[k].cost_index)];
    }
  }
  for (int s = 0; s < ns; ++s) {
    const int r = row_of[static_cast<std::size_t>(s)];
    if (r < 0) continue;
    o.base.add_row(flow[static_cast<std::size_t>(r)], Sense::Eq, s == mdp.initial ? 1.0 : 0.0);
  }
  return o;
}

std::vector<int> default_order(const ObjectiveSpec& obj, const std::vector<Bound>& bounds) {
  std::vector<int> free_cost, free_prob, bound_cost, bound_prob;
  for (std::size_t k = 0; k < obj.size(); ++k) {
    bool bounded = false;
    for (const Bound& b : bounds) bounded |= b.objective == static_cast<int>(k);
    const bool cost = obj[k].kind == Objective::Kind::TotalCost;
    auto& dst = bounded ? (cost ? bound_cost : bound_prob) : (cost ? free_cost : free_prob);
    dst.push_back(static_cast<int>(k));
  }
  std::vector<int> out = free_cost;
  out.insert(out.end(), free_prob.begin(), free_prob.end());
  out.insert(out.end(), bound_cost.begin(), bound_cost.end());
  out.insert(out.end(), bound_prob.begin(), bound_prob.end());
  return out;
}

// Returns nullopt when the bounds are infeasible.
std::optional<SynthesisResult> solve_occupation(const BeliefMdp& mdp, const ObjectiveSpec& obj,
                                                const std::vector<Bound>& bounds, std::vector<int> order) {
  const int ns = mdp.num_states();
  if (mdp.is_absorbing(mdp.initial)) {
    Policy pi = deterministic_policy(mdp, std::vector<int>(static_cast<std::size_t>(ns), 0));
    SynthesisResult r{pi, evaluate_policy(mdp, pi, obj)};
    for (const Bound& b : bounds) {
      const double v = r.value[static_cast<std::size_t>(b.objective)];
      if (obj[static_cast<std::size_t>(b.objective)].maximize() ? v < b.value - 1e-9 : v > b.value + 1e-9) return std::nullopt;
    }
    return r;
  }
  OccupationLp o = occupation_lp(mdp, obj);
  LinearProgram lp = o.base;
  for (const Bound& b : bounds) {
    const auto k = static_cast<std::size_t>(b.objective);
    lp.add_row(o.coef[k], obj[k].maximize() ? Sense::Ge : Sense::Le, b.value);
  }
  if (order.empty()) order = default_order(obj, bounds);
  for (std::size_t k = 0; k < obj.size(); ++k) {
    if (std::find(order.begin(), order.end(), static_cast<int>(k)) == order.end()) order.push_back(static_cast<int>(k));
  }
  LpResult res;
  for (int k : order) {
    const auto uk = static_cast<std::size_t>(k);
    const double sg = obj[uk].maximize() ? -1.0 : 1.0;
    for (std::size_t v = 0; v < o.vars.size(); ++v) lp.c[v] = sg * o.coef[uk][v];
    res = solve_lp(lp);
    if (res.status == LpStatus::Infeasible) return std::nullopt;
    if (res.status != LpStatus::Optimal) throw NumericalError("occupation LP is unbounded");
    const double best = dot(o.coef[uk], res.x);
    const double slack = 1e-9 * std::max(1.0, std::abs(best));
    lp.add_row(o.coef[uk], obj[uk].maximize() ? Sense::Ge : Sense::Le, obj[uk].maximize() ? best - slack : best + slack);
  }
  Policy pi;
  pi.probs.resize(static_cast<std::size_t>(ns));
  for (int s = 0; s < ns; ++s) pi.probs[static_cast<std::size_t>(s)].assign(mdp.actions[static_cast<std::size_t>(s)].size(), 0.0);
  std::vector<double> mass(static_cast<std::size_t>(ns), 0.0);
  for (std::size_t v = 0; v < o.vars.size(); ++v) mass[static_cast<std::size_t>(o.vars[v].first)] += res.x[v];
  for (std::size_t v = 0; v < o.vars.size(); ++v) {
    const auto [s, a] = o.vars[v];
    if (mass[static_cast<std::size_t>(s)] > 1e-12) {
      pi.probs[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = res.x[v] / mass[static_cast<std::size_t>(s)];
    }
  }
  for (int s = 0; s < ns; ++s) {
    auto& p = pi.probs[static_cast<std::size_t>(s)];
    if (mass[static_cast<std::size_t>(s)] <= 1e-12) {
      std::fill(p.begin(), p.end(), 0.0);
      p[0] = 1.0;
      continue;
    }
    // Drop LP round-off and renormalize so each row sums to one exactly enough.
    double sum = 0.0;
    for (double& q : p) {
      if (q < 1e-12) q = 0.0;
      sum += q;
    }
    for (double& q : p) q /= sum;
  }
  return SynthesisResult{pi, evaluate_policy(mdp, pi, obj)};
}

}  // namespace

std::vector<double> project_onto_front(const ParetoFront& front, const std::vector<Bound>& bounds) {
  const std::size_t nv = front.vertices.size();
  if (nv == 0) throw InvalidInput("front has no vertices");
  const std::size_t d = front.objectives.size();
  auto point = [&](const std::vector<double>& lam) {
    std::vector<double> x(d, 0.0);
    for (std::size_t v = 0; v < nv; ++v) {
      for (std::size_t k = 0; k < d; ++k) x[k] += lam[v] * front.vertices[v].value[k];
    }
    return x;
  };
  auto violation = [&](const std::vector<double>& x) {
    std::vector<double> r(d, 0.0);
    for (const Bound& b : bounds) {
      const auto k = static_cast<std::size_t>(b.objective);
      r[k] = front.objectives[k].maximize() ? std::max(0.0, b.value - x[k]) : std::max(0.0, x[k] - b.value);
    }
    return r;
  };
  double lip = 0.0;
  for (const Bound& b : bounds) {
    for (std::size_t v = 0; v < nv; ++v) {
      const double e = front.vertices[v].value[static_cast<std::size_t>(b.objective)];
      lip += e * e;
    }
  }
  lip = std::max(lip, 1e-12);
  auto project_simplex = [](std::vector<double> y) {
    std::vector<double> u = y;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      css += u[i];
      const double t = (css - 1.0) / static_cast<double>(i + 1);
      if (u[i] - t > 0) theta = t;
    }
    for (double& v : y) v = std::max(0.0, v - theta);
    return y;
  };
  std::vector<double> lam(nv, 1.0 / static_cast<double>(nv)), z = lam;
  double t = 1.0;
  for (int it = 0; it < 20000; ++it) {
    const std::vector<double> x = point(z);
    const std::vector<double> r = violation(x);
    std::vector<double> g(nv, 0.0);
    for (const Bound& b : bounds) {
      const auto k = static_cast<std::size_t>(b.objective);
      const double sg = front.objectives[k].maximize() ? -1.0 : 1.0;
      for (std::size_t v = 0; v < nv; ++v) g[v] += sg * r[k] * front.vertices[v].value[k];
    }
    std::vector<double> y(nv);
    for (std::size_t v = 0; v < nv; ++v) y[v] = z[v] - g[v] / lip;
    const std::vector<double> next = project_simplex(y);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t v = 0; v < nv; ++v) z[v] = next[v] + (t - 1.0) / tn * (next[v] - lam[v]);
    lam = next;
    t = tn;
  }
  return point(lam);
}

SynthesisResult synthesize_policy(const BeliefMdp& mdp, const ObjectiveSpec& obj, const TargetPoint& point,
                                  const ParetoFront* front) {
  if (point.vertex) {
    if (!front) throw InvalidInput("vertex selection needs a front");
    const auto v = static_cast<std::size_t>(*point.vertex);
    if (v >= front->vertices.size()) {
      throw InvalidInput("vertex index " + std::to_string(v) + " out of range (front has " +
                         std::to_string(front->vertices.size()) + " vertices)");
    }
    Policy pi = deterministic_policy(mdp, front->vertices[v].choice);
    return SynthesisResult{pi, evaluate_policy(mdp, pi, obj)};
  }
  for (const Bound& b : point.bounds) {
    if (b.objective < 0 || b.objective >= static_cast<int>(obj.size())) throw InvalidInput("bound objective out of range");
  }
  auto sol = solve_occupation(mdp, obj, point.bounds, point.optimize_order);
  if (sol) {
    for (const Bound& b : point.bounds) {
      const double v = sol->value[static_cast<std::size_t>(b.objective)];
      const double tol = 1e-6 * std::max(1.0, std::abs(b.value));
      const bool ok = obj[static_cast<std::size_t>(b.objective)].maximize() ? v >= b.value - tol : v <= b.value + tol;
      if (!ok) throw NumericalError("synthesized policy misses the bound on " + obj[static_cast<std::size_t>(b.objective)].name);
    }
    return *sol;
  }
  ParetoFront computed;
  if (!front) {
    computed = compute_front(mdp, obj);
    front = &computed;
  }
  const std::vector<double> x = project_onto_front(*front, point.bounds);
  std::vector<Bound> relaxed;
  for (const Bound& b : point.bounds) {
    const auto k = static_cast<std::size_t>(b.objective);
    const double slack = 1e-9 * std::max(1.0, std::abs(x[k]));
    relaxed.push_back({b.objective, obj[k].maximize() ? std::min(b.value, x[k] - slack) : std::max(b.value, x[k] + slack)});
  }
  std::vector<double> nearest = x;
  if (auto near = solve_occupation(mdp, obj, relaxed, point.optimize_order)) nearest = near->value;
  std::ostringstream os;
  os << "requested point is not achievable; nearest achievable point is (";
  for (std::size_t k = 0; k < nearest.size(); ++k) os << (k ? ", " : "") << obj[k].name << "=" << nearest[k];
  os << ")";
  throw UnachievablePoint(os.str(), nearest);
}

std::optional<double> percent_saved(double baseline, double value) {
  if (baseline == 0.0) return std::nullopt;
  return 100.0 * (baseline - value) / baseline;
}

std::vector<SavingsRow> savings_report(const ParetoFront& front, const std::vector<double>& baseline) {
  if (baseline.size() != front.objectives.size()) throw InvalidInput("baseline has the wrong number of objectives");
  std::vector<SavingsRow> rows;
  for (const FrontVertex& v : front.vertices) {
    SavingsRow r;
    r.value = v.value;
    for (std::size_t k = 0; k < v.value.size(); ++k) {
      if (front.objectives[k].kind == Objective::Kind::TotalCost) {
        r.savings.push_back(percent_saved(baseline[k], v.value[k]));
      } else {
        r.savings.push_back(std::nullopt);
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

nlohmann::json front_to_json(const ParetoFront& front, const BeliefMdp& mdp) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "pareto_front";
  for (const Objective& o : front.objectives) j["objectives"].push_back(o.name);
  j["scale"] = front.scale;
  j["refinement_gap"] = front.refinement_gap;
  j["queries"] = front.queries;
  j["vertices"] = nlohmann::json::array();
  for (const FrontVertex& v : front.vertices) {
    nlohmann::json jv;
    jv["value"] = v.value;
    jv["policy"] = policy_to_json(mdp, deterministic_policy(mdp, v.choice));
    j["vertices"].push_back(jv);
  }
  j["facets"] = nlohmann::json::array();
  for (const SupportingWeight& f : front.facets) j["facets"].push_back({{"weight", f.weight}, {"support", f.support}});
  return j;
}

ParetoFront front_from_json(const nlohmann::json& j, const BeliefMdp& mdp) {
  try {
    if (j.at("format_version").get<int>() != 1) throw InvalidInput("unsupported front format_version");
    if (j.at("kind").get<std::string>() != "pareto_front") throw InvalidInput("document is not a Pareto front");
    ParetoFront f;
    f.objectives = make_objectives(j.at("objectives").get<std::vector<std::string>>(), mdp);
    f.scale = j.at("scale").get<std::vector<double>>();
    f.refinement_gap = j.at("refinement_gap").get<double>();
    f.queries = j.at("queries").get<int>();
    for (const auto& jv : j.at("vertices")) {
      const Policy pi = policy_from_json(mdp, jv.at("policy"));
      FrontVertex v;
      v.value = jv.at("value").get<std::vector<double>>();
      for (const auto& row : pi.probs) {
        const auto it = std::find(row.begin(), row.end(), 1.0);
        if (it == row.end()) throw InvalidInput("front vertex policy is not deterministic");
        v.choice.push_back(static_cast<int>(it - row.begin()));
      }
      f.vertices.push_back(std::move(v));
    }
    for (const auto& jf : j.at("facets")) {
      f.facets.push_back({jf.at("weight").get<std::vector<double>>(), jf.at("support").get<double>()});
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed front document: ") + e.what());
  }
}

}  // namespace locsched
