#pragma once

#include "locsched/rng.hpp"
#include "locsched/scenario.hpp"

#include <cstdint>
#include <vector>

namespace locsched {

enum class LocStatus : std::uint8_t { Off = 0, Boot = 1, On = 2 };

const char* to_string(LocStatus s);

/// True state together with the robot's own estimate of it.
struct ParticleState {
  Vec x;
  GaussianBelief est;
};

enum class SegmentKind {
  On,           // localization on, ends on the On trigger
  Off,          // localization off, ends on the timer
  Boot,         // booting for the whole segment, ends on the timer
  BootingTail,  // booting for boot_remaining seconds, then On until the On trigger
};

struct SegmentMode {
  SegmentKind kind = SegmentKind::Off;
  double boot_remaining = 0.0;
};

struct SegmentResult {
  ParticleState end;
  bool collided = false;
  double t_off = 0.0;
  double t_boot = 0.0;
  double t_on = 0.0;
  double duration() const { return t_off + t_boot + t_on; }
};

struct TraceSample {
  double t;
  Vec x;
  Vec est;
  double cov_trace;
  LocStatus status;
};

/// Scenario-derived quantities reused by every segment run.
struct ClosedLoopContext {
  const Scenario* scenario = nullptr;
  Mat process_chol;  // sqrt(Q_w dt)
  Mat odometry_chol;
  Mat localization_chol;
  std::vector<ControlLaw> laws;  // laws[0] describes the initial state; laws[i] drives to waypoint i
  std::vector<Mat> steady_chol;  // sqrt of laws[i].steady_cov

  const ControlLaw& law(int i) const { return laws.at(static_cast<std::size_t>(i)); }
};

/// Noise-free closed-loop pass over the waypoint chain. Fills in the Off
/// timer, the On duration, the arrival state and the steady covariance of
/// every law. Throws UnreachableWaypoint when a waypoint cannot be reached
/// within t_max.
std::vector<ControlLaw> compute_nominal_durations(const Scenario& s);

ClosedLoopContext make_context(const Scenario& s);

/// Runs one particle through segment `law` until the mode's trigger fires or
/// it collides. When `trace` is non-null, one sample per step is appended
/// with times offset by `t0`.
SegmentResult run_segment(const ParticleState& start, const ControlLaw& law, SegmentMode mode,
                          const ClosedLoopContext& ctx, Rng& rng, std::vector<TraceSample>* trace = nullptr,
                          double t0 = 0.0);

/// Straightforward version of run_segment built from the public plant
/// functions. Kept as a test oracle; it draws the same random numbers.
SegmentResult run_segment_reference(const ParticleState& start, const ControlLaw& law, SegmentMode mode,
                                    const ClosedLoopContext& ctx, Rng& rng);

/// Draws a state from the stabilized belief at law.arrival_state, rejecting
/// samples in collision. The estimate is the stabilized belief itself.
ParticleState sample_snapped(const ControlLaw& law, const ClosedLoopContext& ctx, Rng& rng);

struct CostBreakdown {
  double energy;
  double loc_energy;
  double duration;
};

CostBreakdown segment_costs(const SegmentResult& r, const Scenario& s);

}  // namespace locsched
