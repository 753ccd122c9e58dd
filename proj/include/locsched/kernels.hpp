#pragma once

#include "locsched/closed_loop.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace locsched {

enum class Exec { Serial, Parallel };

/// Calls fn(k) for k in [0, n). The parallel variant uses OpenMP; an
/// exception thrown for the lowest failing index is rethrown after the loop.
void for_each_index_serial(int n, const std::function<void(int)>& fn);
void for_each_index_omp(int n, const std::function<void(int)>& fn);

inline void for_each_index(int n, Exec exec, const std::function<void(int)>& fn) {
  if (exec == Exec::Serial) {
    for_each_index_serial(n, fn);
  } else {
    for_each_index_omp(n, fn);
  }
}

/// Caps the OpenMP worker count; 0 leaves the runtime default.
void set_thread_count(int n);
int max_threads();

/// Runs every particle through one segment. Particle k draws from the
/// stream make_rng(stream, {k}), so results do not depend on `exec`.
std::vector<SegmentResult> propagate_particles(const std::vector<ParticleState>& in, const ControlLaw& law, SegmentMode mode,
                                  const ClosedLoopContext& ctx, std::uint64_t stream, Exec exec);

}  // namespace locsched
