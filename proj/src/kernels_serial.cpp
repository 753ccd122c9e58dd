#include "locsched/kernels.hpp"

namespace locsched {

void for_each_index_serial(int n, const std::function<void(int)>& fn) {
  for (int k = 0; k < n; ++k) fn(k);
}

std::vector<SegmentResult> propagate_particles(const std::vector<ParticleState>& in, const ControlLaw& law,
                                               SegmentMode mode, const ClosedLoopContext& ctx, std::uint64_t stream,
                                               Exec exec) {
  std::vector<SegmentResult> out(in.size());
  for_each_index(static_cast<int>(in.size()), exec, [&](int k) {
    Rng rng = make_rng(stream, {static_cast<std::uint64_t>(k)});
    out[static_cast<std::size_t>(k)] = run_segment(in[static_cast<std::size_t>(k)], law, mode, ctx, rng);
  });
  return out;
}

}  // namespace locsched
