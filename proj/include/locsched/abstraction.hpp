#pragma once

#include "locsched/closed_loop.hpp"
#include "locsched/kernels.hpp"
#include "locsched/mdp.hpp"

#include <cstdint>
#include <vector>

namespace locsched {

/// Weighted particle set over collision-free states.
struct ParticleBelief {
  std::vector<ParticleState> particles;
  std::vector<double> weights;
  double survival_mass = 1.0;

  bool empty() const { return particles.empty(); }
};

struct SegmentOutcome {
  ParticleBelief next;
  double p_collide = 0.0;
  CostVec cost;  // energy, loc_energy, duration
  double duration = 0.0;
};

/// Random stream tags; every node and action draws from its own stream.
enum StreamTag : std::uint64_t { kTagOn = 1, kTagOff = 2, kTagSbo = 3, kTagSnap = 4, kTagResample = 5 };

const std::vector<std::string>& cost_names();

ParticleBelief resample_systematic(const ParticleBelief& b, int n, Rng& rng);

/// Stabilized belief at waypoint law.index: n draws from the steady-state
/// Gaussian restricted to free space, equally weighted.
ParticleBelief snapped_belief(const ControlLaw& law, const ClosedLoopContext& ctx, int n, std::uint64_t stream);

/// Pushes a belief through one segment. The belief is first resampled to
/// `n_particles`; colliding particles are dropped and their weight becomes
/// p_collide. In On mode the result is replaced by the stabilized belief.
SegmentOutcome propagate_segment(const ParticleBelief& b, const ControlLaw& law, SegmentMode mode,
                                 const ClosedLoopContext& ctx, int n_particles, std::uint64_t stream,
                                 Exec exec = Exec::Parallel);

/// Weighted average of the per-particle integrated cost over one segment.
CostVec expected_segment_cost(const std::vector<SegmentResult>& results, const std::vector<double>& weights,
                              const Scenario& s);

struct AbstractionOptions {
  int particles = 2000;
  std::uint64_t seed = 0;
  Exec exec = Exec::Parallel;
};

/// Smallest m > i with sum of nominal durations i+1..m strictly above
/// T_boot, or -1 when no such m <= n exists.
int boot_completion_index(const std::vector<double>& nominal_durations, int i, double boot_time);

BeliefMdp build_mdp(const Scenario& s, const AbstractionOptions& opt);

/// Closed-form node count (n+2)(n+1)/2 + 3.
int expected_state_count(int segments);

}  // namespace locsched
