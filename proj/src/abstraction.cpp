#include "locsched/abstraction.hpp"

#include <cmath>
#include <string>

namespace locsched {

const std::vector<std::string>& cost_names() {
  static const std::vector<std::string> names{"energy", "loc_energy", "duration"};
  return names;
}

ParticleBelief resample_systematic(const ParticleBelief& b, int n, Rng& rng) {
  ParticleBelief out;
  out.survival_mass = b.survival_mass;
  if (b.empty() || n <= 0) return out;
  double total = 0.0;
  for (double w : b.weights) total += w;
  const double step = total / n;
  double u = uniform01(rng) * step;
  double cum = b.weights[0];
  std::size_t idx = 0;
  out.particles.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    while (u > cum && idx + 1 < b.particles.size()) cum += b.weights[++idx];
    out.particles.push_back(b.particles[idx]);
    u += step;
  }
  out.weights.assign(static_cast<std::size_t>(n), 1.0 / n);
  return out;
}

ParticleBelief snapped_belief(const ControlLaw& law, const ClosedLoopContext& ctx, int n, std::uint64_t stream) {
  ParticleBelief out;
  out.particles.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Rng rng = make_rng(stream, {static_cast<std::uint64_t>(k)});
    out.particles[static_cast<std::size_t>(k)] = sample_snapped(law, ctx, rng);
  }
  out.weights.assign(static_cast<std::size_t>(n), 1.0 / n);
  return out;
}

CostVec expected_segment_cost(const std::vector<SegmentResult>& results, const std::vector<double>& weights,
                              const Scenario& s) {
  CostVec c(3, 0.0);
  for (std::size_t k = 0; k < results.size(); ++k) {
    const CostBreakdown b = segment_costs(results[k], s);
    c[0] += weights[k] * b.energy;
    c[1] += weights[k] * b.loc_energy;
    c[2] += weights[k] * b.duration;
  }
  return c;
}

namespace {

struct Propagated {
  std::vector<ParticleState> survivors;
  double p_survive = 0.0;
  CostVec cost{0.0, 0.0, 0.0};
  double in_boot_time = 0.0;  // expected time spent booting or off
};

ParticleBelief equal_weights(std::vector<ParticleState> ps) {
  ParticleBelief b;
  const std::size_t n = ps.size();
  b.particles = std::move(ps);
  b.weights.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  return b;
}

Propagated propagate(const ParticleBelief& b, const ControlLaw& law, SegmentMode mode, const ClosedLoopContext& ctx,
                     int n, std::uint64_t stream, Exec exec) {
  Propagated out;
  if (b.empty()) return out;
  Rng rs = make_rng(stream, {kTagResample});
  const ParticleBelief in = static_cast<int>(b.particles.size()) == n ? b : resample_systematic(b, n, rs);
  const std::vector<SegmentResult> res = propagate_particles(in.particles, law, mode, ctx, stream, exec);
  out.cost = expected_segment_cost(res, in.weights, *ctx.scenario);
  for (std::size_t k = 0; k < res.size(); ++k) {
    out.in_boot_time += in.weights[k] * (res[k].t_off + res[k].t_boot);
    if (res[k].collided) continue;
    out.p_survive += in.weights[k];
    out.survivors.push_back(res[k].end);
  }
  if (out.survivors.size() == res.size()) out.p_survive = 1.0;
  return out;
}

std::string node_id(int i, int j) { return "n" + std::to_string(i) + "_" + std::to_string(j); }

}  // namespace

SegmentOutcome propagate_segment(const ParticleBelief& b, const ControlLaw& law, SegmentMode mode,
                                 const ClosedLoopContext& ctx, int n_particles, std::uint64_t stream, Exec exec) {
  if (b.empty()) throw InvalidInput("cannot propagate an empty belief");
  Propagated p = propagate(b, law, mode, ctx, n_particles, stream, exec);
  SegmentOutcome out;
  out.p_collide = 1.0 - p.p_survive;
  out.cost = p.cost;
  out.duration = p.cost[2];
  if (mode.kind == SegmentKind::On || mode.kind == SegmentKind::BootingTail) {
    if (!p.survivors.empty()) out.next = snapped_belief(law, ctx, n_particles, stream_key(stream, {kTagSnap}));
  } else {
    out.next = equal_weights(std::move(p.survivors));
  }
  out.next.survival_mass = b.survival_mass * p.p_survive;
  return out;
}

int boot_completion_index(const std::vector<double>& nominal_durations, int i, double boot_time) {
  const int n = static_cast<int>(nominal_durations.size()) - 1;
  double sum = 0.0;
  for (int m = i + 1; m <= n; ++m) {
    sum += nominal_durations[static_cast<std::size_t>(m)];
    if (sum > boot_time) return m;
  }
  return -1;
}

int expected_state_count(int segments) { return (segments + 2) * (segments + 1) / 2 + 3; }

BeliefMdp build_mdp(const Scenario& s, const AbstractionOptions& opt) {
  if (opt.particles < 1) throw InvalidInput("particle count must be positive");
  validate_scenario(s);
  const ClosedLoopContext ctx = make_context(s);
  const int n = s.num_segments();
  const int N = opt.particles;
  const std::uint64_t seed = opt.seed;

  BeliefMdp mdp;
  mdp.cost_names = cost_names();
  mdp.boot_time = s.boot.time;
  mdp.nominal_durations.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 1; i <= n; ++i) mdp.nominal_durations[static_cast<std::size_t>(i)] = ctx.law(i).nominal_duration;

  // State layout: nodes by i then j, then coll, targ, free.
  auto sid = [](int i, int j) { return i * (i + 1) / 2 + j; };
  const int n_nodes = (n + 1) * (n + 2) / 2;
  const int coll = n_nodes, targ = n_nodes + 1, freest = n_nodes + 2;
  mdp.states.resize(static_cast<std::size_t>(n_nodes) + 3);
  mdp.actions.resize(mdp.states.size());
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= i; ++j) mdp.states[static_cast<std::size_t>(sid(i, j))] = {node_id(i, j), StateRole::Node, i, j};
  }
  mdp.states[static_cast<std::size_t>(coll)] = {"coll", StateRole::Coll, -1, -1};
  mdp.states[static_cast<std::size_t>(targ)] = {"targ", StateRole::Targ, -1, -1};
  mdp.states[static_cast<std::size_t>(freest)] = {"free", StateRole::Free, -1, -1};
  for (int a : {coll, targ, freest}) mdp.actions[static_cast<std::size_t>(a)].push_back({"stay", {{a, 1.0}}, {0.0, 0.0, 0.0}});
  mdp.initial = sid(0, 0);

  auto two_way = [&](int to, double p_survive) {
    std::vector<Transition> t;
    if (p_survive > 0.0) t.push_back({to, p_survive});
    if (p_survive < 1.0) t.push_back({coll, 1.0 - p_survive});
    return t;
  };
  const CostVec zero{0.0, 0.0, 0.0};
  const double boot_rate = s.boot.energy / s.boot.time;

  for (int j = 0; j <= n; ++j) {
    // Chain j: beliefs B_i^j for i = j..n under Off, starting from the stabilized belief.
    std::vector<ParticleBelief> chain(static_cast<std::size_t>(n) + 1);
    std::vector<Propagated> off(static_cast<std::size_t>(n) + 1);
    chain[static_cast<std::size_t>(j)] =
        snapped_belief(ctx.law(j), ctx, N, stream_key(seed, {kTagSnap, static_cast<std::uint64_t>(j)}));
    for (int i = j; i < n; ++i) {
      const auto key = stream_key(seed, {kTagOff, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
      off[static_cast<std::size_t>(i)] =
          propagate(chain[static_cast<std::size_t>(i)], ctx.law(i + 1), {SegmentKind::Off, 0.0}, ctx, N, key, opt.exec);
      chain[static_cast<std::size_t>(i) + 1] = equal_weights(off[static_cast<std::size_t>(i)].survivors);
    }

    for (int i = j; i <= n; ++i) {
      auto& acts = mdp.actions[static_cast<std::size_t>(sid(i, j))];
      const ParticleBelief& b = chain[static_cast<std::size_t>(i)];
      if (i == n) {
        if (b.empty()) {
          acts.push_back({"fin", {{coll, 1.0}}, zero});
          continue;
        }
        double in_t = 0.0;
        for (std::size_t k = 0; k < b.particles.size(); ++k) {
          if (in_target(b.particles[k].x, s.footprint, s.workspace)) in_t += b.weights[k];
        }
        if (in_t >= 1.0 - 1e-15) in_t = 1.0;
        std::vector<Transition> t;
        if (in_t > 0.0) t.push_back({targ, in_t});
        if (in_t < 1.0) t.push_back({freest, 1.0 - in_t});
        acts.push_back({"fin", t, zero});
        continue;
      }
      const Propagated& po = off[static_cast<std::size_t>(i)];
      const int m_boot = i == j ? -1 : boot_completion_index(mdp.nominal_durations, i, s.boot.time);
      if (b.empty()) {
        acts.push_back({"off", {{coll, 1.0}}, zero});
        if (i == j) acts.push_back({"on", {{coll, 1.0}}, zero});
        if (m_boot >= 0) acts.push_back({"sbo", {{coll, 1.0}}, zero});
        continue;
      }
      acts.push_back({"off", two_way(sid(i + 1, j), po.p_survive), po.cost});
      if (i == j) {
        const auto key = stream_key(seed, {kTagOn, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
        const Propagated pon = propagate(b, ctx.law(i + 1), {SegmentKind::On, 0.0}, ctx, N, key, opt.exec);
        acts.push_back({"on", two_way(sid(i + 1, i + 1), pon.p_survive), pon.cost});
        continue;
      }
      const int m = m_boot;
      if (m < 0) continue;
      // Booting segments i+1..m-1 evolve exactly like Off; only their cost differs.
      double surv = 1.0;
      CostVec cost = zero;
      double booted = 0.0;
      for (int k = i; k <= m - 2; ++k) {
        const Propagated& pk = off[static_cast<std::size_t>(k)];
        cost[0] += surv * (pk.cost[0] + boot_rate * pk.in_boot_time);
        cost[1] += surv * (pk.cost[1] + boot_rate * pk.in_boot_time);
        cost[2] += surv * pk.cost[2];
        surv *= pk.p_survive;
        booted += mdp.nominal_durations[static_cast<std::size_t>(k) + 1];
      }
      const ParticleBelief& tail_in = chain[static_cast<std::size_t>(m) - 1];
      if (surv > 0.0 && !tail_in.empty()) {
        const auto key = stream_key(seed, {kTagSbo, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
        const Propagated tail =
            propagate(tail_in, ctx.law(m), {SegmentKind::BootingTail, s.boot.time - booted}, ctx, N, key, opt.exec);
        for (int c = 0; c < 3; ++c) cost[static_cast<std::size_t>(c)] += surv * tail.cost[static_cast<std::size_t>(c)];
        surv *= tail.p_survive;
      } else {
        surv = 0.0;
      }
      acts.push_back({"sbo", two_way(sid(m, m), surv), cost});
    }
  }

  mdp.provenance["particles"] = N;
  mdp.provenance["seed"] = seed;
  validate_mdp(mdp, 1e-12);
  return mdp;
}

}  // namespace locsched
