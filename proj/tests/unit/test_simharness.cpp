#include "locsched/abstraction.hpp"
#include "locsched/simharness.hpp"

#include <doctest.h>

#include <sstream>
#include <string>

using namespace locsched;

namespace {

Scenario shipped(const char* name) { return load_scenario_file(std::string(LOCSCHED_SCENARIO_DIR) + "/" + name + ".yaml"); }

Scenario noiseless(Scenario s) {
  const int n = s.plant.dim();
  s.plant.process_noise = Mat::Zero(n, n);
  s.sensors.odometry_cov = Mat::Zero(n, n);
  s.sensors.localization_cov = Mat::Zero(n, n);
  return s;
}

}  // namespace

TEST_CASE("noise-free always-on mission reaches the target at nominal cost") {
  const Scenario s = noiseless(shipped("short"));
  const BeliefMdp m = build_mdp(s, {20, 1, Exec::Serial});
  const ClosedLoopContext ctx = make_context(s);
  const RunRecord r = simulate_mission(ctx, baseline_schedule(m, LocAction::On), 5, false);
  CHECK(r.outcome == Outcome::Target);
  double t_on = 0.0;
  for (int i = 1; i <= s.num_segments(); ++i) t_on += ctx.law(i).on_duration;
  CHECK(r.cost[2] == doctest::Approx(t_on));
  CHECK(r.cost[0] == doctest::Approx(t_on * (s.power.base + s.power.on)));
  CHECK(r.cost[1] == doctest::Approx(t_on * s.power.on));
}

TEST_CASE("off-mode mission lasts the sum of the nominal durations") {
  const Scenario s = shipped("open");
  const ClosedLoopContext ctx = make_context(s);
  Schedule off;
  off.segments = s.num_segments();
  off.boot_time = s.boot.time;
  off.nominal_durations.assign(static_cast<std::size_t>(off.segments) + 1, 0.0);
  double total = 0.0;
  for (int i = 0; i < off.segments; ++i) {
    off.nodes[{i, 0}] = NodeSchedule{{{LocAction::Off, 1.0}}, std::nullopt};
    off.nominal_durations[static_cast<std::size_t>(i) + 1] = ctx.law(i + 1).nominal_duration;
    total += ctx.law(i + 1).nominal_duration;
  }
  CHECK(s.num_segments() == 26);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RunRecord r = simulate_mission(ctx, off, seed, false);
    if (r.outcome == Outcome::Collision) continue;
    CHECK(r.cost[2] == doctest::Approx(total).epsilon(1e-9));
    CHECK(r.actions.end_time == doctest::Approx(total).epsilon(1e-9));
  }
}

TEST_CASE("validation does not depend on thread count") {
  const Scenario s = shipped("short");
  const BeliefMdp m = build_mdp(s, {100, 2, Exec::Parallel});
  const Policy pi = label_policy(m, "sbo");
  const Schedule sched = policy_to_schedule(pi, m);
  const auto theo = theoretical_values(m, pi);
  set_thread_count(4);
  const ValidationReport a = validate(s, sched, theo, 64, 9, Exec::Parallel);
  set_thread_count(0);
  const ValidationReport b = validate(s, sched, theo, 64, 9, Exec::Serial);
  CHECK(report_to_json(a, 0.05, 0.05).dump() == report_to_json(b, 0.05, 0.05).dump());
  CHECK(a.outcomes[0] + a.outcomes[1] + a.outcomes[2] == 64);
}

TEST_CASE("simulated action traces are feasible") {
  const Scenario s = shipped("short");
  const BeliefMdp m = build_mdp(s, {100, 2, Exec::Parallel});
  const ClosedLoopContext ctx = make_context(s);
  const Schedule sched = policy_to_schedule(label_policy(m, "sbo"), m);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const RunRecord r = simulate_mission(ctx, sched, seed, true);
    CHECK(check_feasibility(r.actions, s.boot.time).empty());
    REQUIRE_FALSE(r.trace.empty());
    CHECK(r.trace.back().t == doctest::Approx(r.cost[2]));
  }
}

TEST_CASE("consistency thresholds") {
  ValidationReport r;
  r.runs = 1000;
  r.empirical = {{0.90, 0}, {0.05, 0}, {105.0, 1}, {10.0, 1}, {50.0, 1}};
  r.theoretical = {0.93, 0.05, 100.0, 10.0, 40.0};
  auto refresh = [&] {
    r.deviation.clear();
    for (std::size_t q = 0; q < 5; ++q) r.deviation.push_back(r.empirical[q].mean - r.theoretical[q]);
  };
  refresh();
  const auto ok = consistency(r, 0.05, 0.05);
  CHECK(ok[0]);
  CHECK(ok[1]);
  CHECK(ok[2]);
  CHECK(ok[3]);
  CHECK_FALSE(ok[4]);
  r.empirical[0].mean = 0.80;
  refresh();
  CHECK_FALSE(consistency(r, 0.05, 0.05)[0]);
}

TEST_CASE("trace decimation keeps status changes") {
  std::vector<TraceSample> tr;
  for (int k = 0; k < 1000; ++k) {
    const LocStatus st = k < 500 ? LocStatus::Off : (k < 510 ? LocStatus::Boot : LocStatus::On);
    tr.push_back({k * 0.1, Vec::Zero(2), Vec::Zero(2), 0.0, st});
  }
  const auto d = decimate(tr, 50);
  CHECK(d.size() <= 50);
  CHECK(d.back().t == tr.back().t);
  bool boot = false, on = false;
  for (const auto& x : d) {
    boot |= x.t == tr[500].t;
    on |= x.t == tr[510].t;
  }
  CHECK(boot);
  CHECK(on);
}

TEST_CASE("trace CSV and SVG outputs") {
  const Scenario s = shipped("short");
  const BeliefMdp m = build_mdp(s, {50, 2, Exec::Parallel});
  const ValidationReport rep =
      validate(s, baseline_schedule(m, LocAction::On), theoretical_values(m, label_policy(m, "on")), 3, 1, Exec::Serial, 2);
  REQUIRE(rep.samples.size() == 2);
  std::ostringstream os;
  write_traces_csv(os, rep.samples);
  CHECK(os.str().rfind("run,t,", 0) == 0);
  const std::string svg = render_svg(s, rep.samples);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
