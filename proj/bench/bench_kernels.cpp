// Serial vs OpenMP particle propagation on the open scenario.

#include "locsched/abstraction.hpp"
#include "locsched/kernels.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace locsched;

namespace {

struct Fixture {
  Scenario scenario;
  ClosedLoopContext ctx;
  ParticleBelief start;

  Fixture() : scenario(load_scenario_file(std::string(LOCSCHED_SCENARIO_DIR) + "/open.yaml")) {
    ctx = make_context(scenario);
    start = snapped_belief(ctx.law(5), ctx, 4000, 1);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void run(benchmark::State& state, Exec exec, SegmentKind kind) {
  const Fixture& f = fixture();
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<ParticleState> in(f.start.particles.begin(), f.start.particles.begin() + static_cast<std::ptrdiff_t>(n));
  std::uint64_t stream = 0;
  for (auto _ : state) {
    auto out = propagate_particles(in, f.ctx.law(6), {kind, 0.0}, f.ctx, ++stream, exec);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(n));
  state.counters["threads"] = exec == Exec::Serial ? 1 : max_threads();
}

void BM_OffSerial(benchmark::State& s) { run(s, Exec::Serial, SegmentKind::Off); }
void BM_OffParallel(benchmark::State& s) { run(s, Exec::Parallel, SegmentKind::Off); }
void BM_OnSerial(benchmark::State& s) { run(s, Exec::Serial, SegmentKind::On); }
void BM_OnParallel(benchmark::State& s) { run(s, Exec::Parallel, SegmentKind::On); }

}  // namespace

BENCHMARK(BM_OffSerial)->Arg(500)->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OffParallel)->Arg(500)->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OnSerial)->Arg(500)->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OnParallel)->Arg(500)->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
