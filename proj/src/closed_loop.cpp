#include "locsched/closed_loop.hpp"

#include <algorithm>
#include <cmath>

namespace locsched {

const char* to_string(LocStatus s) {
  switch (s) {
    case LocStatus::Off:
      return "off";
    case LocStatus::Boot:
      return "boot";
    case LocStatus::On:
      return "on";
  }
  return "?";
}

namespace {

Vec target_of(const Scenario& s, int i) {
  if (s.plant.kind == PlantKind::Unicycle2ndOrder) return s.waypoint(i);
  if (i == 0) return s.initial_state;
  return s.waypoints.at(static_cast<std::size_t>(i - 1));
}

double pos_dist2(const Vec& x, const Vec& target) {
  const double dx = x(0) - target(0), dy = x(1) - target(1);
  return dx * dx + dy * dy;
}

}  // namespace

std::vector<ControlLaw> compute_nominal_durations(const Scenario& s) {
  const int n = s.num_segments();
  const PlantModel& plant = s.plant;
  const ControllerParams& cp = s.controller;
  const double dt = plant.dt;
  const long max_steps = static_cast<long>(std::ceil(cp.t_max / dt));
  const Vec zero_noise = Vec::Zero(plant.dim());

  std::vector<ControlLaw> laws(static_cast<std::size_t>(n) + 1);
  laws[0].index = 0;
  laws[0].target = target_of(s, 0);
  laws[0].arrival_state = s.initial_state;
  laws[0].steady_cov = steady_state_covariance(plant, s.sensors, s.initial_state).cov;

  Vec x = s.initial_state;
  for (int i = 1; i <= n; ++i) {
    ControlLaw& law = laws[static_cast<std::size_t>(i)];
    law.index = i;
    law.target = target_of(s, i);
    const double reach2 = cp.reach_radius * cp.reach_radius;
    const double eps2 = cp.eps_mean * cp.eps_mean;
    long reach_steps = -1;
    long steps = 0;
    GaussianBelief est{x, Mat::Zero(plant.dim(), plant.dim())};
    while (true) {
      est.mean = x;
      const Vec u = control(est, law.target, plant, cp).u;
      x = step_dynamics(x, u, plant, zero_noise);
      ++steps;
      const double d2 = pos_dist2(x, law.target);
      if (reach_steps < 0 && d2 < reach2) reach_steps = steps;
      if (d2 < eps2) break;
      if (steps >= max_steps) {
        throw UnreachableWaypoint(i, "waypoint " + std::to_string(i) + " not reached within t_max = " +
                                         std::to_string(cp.t_max) + " s");
      }
    }
    if (reach_steps < 0) reach_steps = steps;
    law.nominal_duration = static_cast<double>(reach_steps) * dt;
    law.on_duration = static_cast<double>(steps) * dt;
    law.arrival_state = x;
    law.steady_cov = steady_state_covariance(plant, s.sensors, x).cov;
  }
  return laws;
}

ClosedLoopContext make_context(const Scenario& s) {
  ClosedLoopContext ctx;
  ctx.scenario = &s;
  ctx.process_chol = psd_sqrt(s.plant.process_noise * s.plant.dt);
  ctx.odometry_chol = psd_sqrt(s.sensors.odometry_cov);
  ctx.localization_chol = psd_sqrt(s.sensors.localization_cov);
  ctx.laws = compute_nominal_durations(s);
  for (const ControlLaw& law : ctx.laws) ctx.steady_chol.push_back(psd_sqrt(law.steady_cov));
  return ctx;
}

namespace {

// Fixed-size copy of the closed loop used on the hot path. It mirrors
// step_dynamics / kalman_predict / kalman_update / control step for step and
// consumes random numbers in the same order as sample_gaussian.
template <int N>
struct FixedLoop {
  using V = Eigen::Matrix<double, N, 1>;
  using M = Eigen::Matrix<double, N, N>;

  const Scenario& s;
  const ControllerParams& cp;
  bool unicycle;
  double dt;
  M drift, q_dt, q_chol, od_cov, od_chol, lo_cov, lo_chol;
  std::normal_distribution<double> normal{0.0, 1.0};

  explicit FixedLoop(const ClosedLoopContext& ctx)
      : s(*ctx.scenario),
        cp(ctx.scenario->controller),
        unicycle(ctx.scenario->plant.kind == PlantKind::Unicycle2ndOrder),
        dt(ctx.scenario->plant.dt) {
    drift = unicycle ? M::Zero() : M(s.plant.drift);
    q_dt = s.plant.process_noise * dt;
    q_chol = ctx.process_chol;
    od_cov = s.sensors.odometry_cov;
    od_chol = ctx.odometry_chol;
    lo_cov = s.sensors.localization_cov;
    lo_chol = ctx.localization_chol;
  }

  V gaussian(Rng& rng, const M& chol) {
    V z;
    for (int k = 0; k < N; ++k) z(k) = normal(rng);
    return chol * z;
  }

  // Heading trigonometry of a state, computed once per step and shared by
  // the controller, the drift and the Jacobian.
  struct Trig {
    double c = 1.0, s = 0.0;
  };

  Trig trig(const V& x) const {
    Trig t;
    if constexpr (N >= 4) {
      if (unicycle) {
        t.c = std::cos(x(3));
        t.s = std::sin(x(3));
      }
    }
    return t;
  }

  // Returns the control; u has N entries, only the first two used by the unicycle.
  V control(const V& xh, const Trig& t, const V& target) const {
    V u = V::Zero();
    if constexpr (N >= 4) {
      if (unicycle) {
        const double ub1 = cp.k1 * (target(0) - xh(0)) - cp.k2 * xh(2) * t.c;
        const double ub2 = cp.k3 * (target(1) - xh(1)) - cp.k4 * xh(2) * t.s;
        double v = xh(2);
        if (std::abs(v) < cp.v_min) v = v >= 0.0 ? cp.v_min : -cp.v_min;
        const Saturation& sat = cp.saturation;
        double u1 = std::clamp(ub1 * t.c + ub2 * t.s, -sat.accel, sat.accel);
        if (std::isfinite(sat.speed)) u1 = std::clamp(u1, (-sat.speed - xh(2)) / dt, (sat.speed - xh(2)) / dt);
        u(0) = u1;
        u(1) = std::clamp((ub2 * t.c - ub1 * t.s) / v, -sat.turn_rate, sat.turn_rate);
        return u;
      }
    }
    V fb = cp.k * (target - xh);
    const double norm = fb.norm();
    if (norm > cp.saturation.control_norm) fb *= cp.saturation.control_norm / norm;
    u = fb - drift * target;
    return u;
  }

  V rate(const V& x, const Trig& t, const V& u) const {
    if constexpr (N >= 4) {
      if (unicycle) {
        V f;
        f(0) = x(2) * t.c;
        f(1) = x(2) * t.s;
        f(2) = u(0);
        f(3) = u(1);
        return f;
      }
    }
    return drift * x + u;
  }

  M jacobian(const V& x, const Trig& t) const {
    if constexpr (N >= 4) {
      if (unicycle) {
        M j = M::Zero();
        j(0, 2) = t.c;
        j(0, 3) = -x(2) * t.s;
        j(1, 2) = t.s;
        j(1, 3) = x(2) * t.c;
        return j;
      }
    }
    return drift;
  }

  void predict(V& mean, M& cov, const Trig& t, const V& u) const {
    const M f = M::Identity() + jacobian(mean, t) * dt;
    mean += rate(mean, t, u) * dt;
    cov = f * cov * f.transpose() + q_dt;
    cov = 0.5 * (cov + cov.transpose()).eval();
  }

  void update(V& mean, M& cov, const V& z, const M& r) const {
    const M sm = cov + r;
    if (sm.isZero(0.0)) return;
    Eigen::LLT<M> llt(sm);
    if (llt.info() != Eigen::Success) throw NumericalError("innovation covariance is not invertible");
    const M k = cov * sm.inverse();
    const M ikh = M::Identity() - k;
    mean += k * (z - mean);
    M p = ikh * cov * ikh.transpose() + k * r * k.transpose();
    p = 0.5 * (p + p.transpose()).eval();
    Eigen::LLT<M> check(p + 1e-9 * M::Identity());
    if (check.info() != Eigen::Success) throw NumericalError("covariance lost positive semidefiniteness");
    cov = p;
  }
};

template <int N>
SegmentResult run_segment_fixed(const ParticleState& start, const ControlLaw& law, SegmentMode mode,
                                const ClosedLoopContext& ctx, Rng& rng, std::vector<TraceSample>* trace, double t0) {
  using V = typename FixedLoop<N>::V;
  using M = typename FixedLoop<N>::M;
  FixedLoop<N> loop(ctx);
  const Scenario& s = *ctx.scenario;
  const double dt = loop.dt;
  const long max_steps = static_cast<long>(std::ceil(s.controller.t_max / dt));
  const long timer_steps = std::max(1L, std::lround(law.nominal_duration / dt));

  LocStatus status = LocStatus::Off;
  if (mode.kind == SegmentKind::On) status = LocStatus::On;
  if (mode.kind == SegmentKind::Boot || mode.kind == SegmentKind::BootingTail) status = LocStatus::Boot;
  const bool on_trigger = mode.kind == SegmentKind::On || mode.kind == SegmentKind::BootingTail;

  V x = start.x;
  V mean = start.est.mean;
  M cov = start.est.cov;
  V target = V::Zero();
  target.head(law.target.size()) = law.target;
  const M steady = law.steady_cov;
  const double eps_mean2 = s.controller.eps_mean * s.controller.eps_mean;
  const double eps_var = s.controller.eps_var;

  SegmentResult r;
  long steps_off = 0, steps_boot = 0, steps_on = 0;
  double acc = 0.0;
  int loc_updates = 0;
  auto finish = [&](bool collided) {
    r.collided = collided;
    r.t_off = static_cast<double>(steps_off) * dt;
    r.t_boot = static_cast<double>(steps_boot) * dt;
    r.t_on = static_cast<double>(steps_on) * dt;
    r.end.x = x;
    r.end.est.mean = mean;
    r.end.est.cov = cov;
    return r;
  };
  auto record = [&](double t) {
    if (trace) trace->push_back({t0 + t, Vec(x), Vec(mean), cov.trace(), status});
  };

  for (long step = 1;; ++step) {
    const auto tm = loop.trig(mean);
    const V u = loop.control(mean, tm, target);
    const V w = loop.gaussian(rng, loop.q_chol);
    x += loop.rate(x, loop.trig(x), u) * dt + w;
    loop.predict(mean, cov, tm, u);
    const double elapsed = static_cast<double>(step) * dt;
    switch (status) {
      case LocStatus::Off:
        ++steps_off;
        break;
      case LocStatus::Boot:
        ++steps_boot;
        break;
      case LocStatus::On:
        ++steps_on;
        break;
    }
    if (in_collision_xy(x(0), x(1), N >= 4 ? x(3) : 0.0, s.footprint, s.workspace)) {
      record(elapsed);
      return finish(true);
    }
    if (status == LocStatus::Boot && mode.kind == SegmentKind::BootingTail && elapsed >= mode.boot_remaining - 1e-9) {
      status = LocStatus::On;
      acc = 0.0;
    }
    const bool loc = status == LocStatus::On;
    const double period = 1.0 / (loc ? s.sensors.localization_rate : s.sensors.odometry_rate);
    acc += dt;
    if (acc >= period - 1e-12) {
      acc -= period;
      const V z = x + loop.gaussian(rng, loc ? loop.lo_chol : loop.od_chol);
      loop.update(mean, cov, z, loc ? loop.lo_cov : loop.od_cov);
      if (loc) ++loc_updates;
    }
    record(elapsed);
    if (on_trigger) {
      if (loc && loc_updates > 0) {
        const double dx = mean(0) - target(0), dy = mean(1) - target(1);
        if (dx * dx + dy * dy < eps_mean2 && (cov - steady).norm() < eps_var) return finish(false);
      }
    } else if (step >= timer_steps) {
      return finish(false);
    }
    if (step >= max_steps) {
      throw ControllerTimeout("segment " + std::to_string(law.index) + " trigger did not fire within t_max = " +
                              std::to_string(s.controller.t_max) + " s");
    }
  }
}

}  // namespace

SegmentResult run_segment(const ParticleState& start, const ControlLaw& law, SegmentMode mode,
                          const ClosedLoopContext& ctx, Rng& rng, std::vector<TraceSample>* trace, double t0) {
  switch (ctx.scenario->plant.dim()) {
    case 2:
      return run_segment_fixed<2>(start, law, mode, ctx, rng, trace, t0);
    case 3:
      return run_segment_fixed<3>(start, law, mode, ctx, rng, trace, t0);
    case 4:
      return run_segment_fixed<4>(start, law, mode, ctx, rng, trace, t0);
    default:
      throw InvalidInput("state dimension must be between 2 and 4");
  }
}

SegmentResult run_segment_reference(const ParticleState& start, const ControlLaw& law, SegmentMode mode,
                                    const ClosedLoopContext& ctx, Rng& rng) {
  const Scenario& s = *ctx.scenario;
  const PlantModel& plant = s.plant;
  const ControllerParams& cp = s.controller;
  const double dt = plant.dt;
  const long max_steps = static_cast<long>(std::ceil(cp.t_max / dt));
  const long timer_steps = std::max(1L, std::lround(law.nominal_duration / dt));

  LocStatus status = LocStatus::Off;
  if (mode.kind == SegmentKind::On) status = LocStatus::On;
  if (mode.kind == SegmentKind::Boot || mode.kind == SegmentKind::BootingTail) status = LocStatus::Boot;
  const bool on_trigger = mode.kind == SegmentKind::On || mode.kind == SegmentKind::BootingTail;

  SegmentResult r;
  r.end = start;
  Vec& x = r.end.x;
  GaussianBelief& est = r.end.est;
  long steps_off = 0, steps_boot = 0, steps_on = 0;
  double acc = 0.0;
  int loc_updates = 0;
  auto finish = [&](bool collided) {
    r.collided = collided;
    r.t_off = static_cast<double>(steps_off) * dt;
    r.t_boot = static_cast<double>(steps_boot) * dt;
    r.t_on = static_cast<double>(steps_on) * dt;
    return r;
  };
  for (long step = 1;; ++step) {
    const Vec u = control(est, law.target, plant, cp).u;
    const Vec w = sample_gaussian(rng, ctx.process_chol);
    x = step_dynamics(x, u, plant, w);
    est = kalman_predict(est, u, plant, dt);
    const double elapsed = static_cast<double>(step) * dt;
    if (status == LocStatus::Off) ++steps_off;
    if (status == LocStatus::Boot) ++steps_boot;
    if (status == LocStatus::On) ++steps_on;
    if (in_collision(x, s.footprint, s.workspace)) return finish(true);
    if (status == LocStatus::Boot && mode.kind == SegmentKind::BootingTail && elapsed >= mode.boot_remaining - 1e-9) {
      status = LocStatus::On;
      acc = 0.0;
    }
    const SensorMode sm = status == LocStatus::On ? SensorMode::Localization : SensorMode::Odometry;
    acc += dt;
    if (acc >= 1.0 / s.sensors.rate(sm) - 1e-12) {
      acc -= 1.0 / s.sensors.rate(sm);
      const Mat& chol = sm == SensorMode::Localization ? ctx.localization_chol : ctx.odometry_chol;
      const Vec z = measure(x, sample_gaussian(rng, chol));
      est = kalman_update(est, z, s.sensors.cov(sm));
      if (sm == SensorMode::Localization) ++loc_updates;
    }
    if (on_trigger) {
      if (status == LocStatus::On && loc_updates > 0 && trigger_fired_on(est, law, cp)) return finish(false);
    } else if (step >= timer_steps) {
      return finish(false);
    }
    if (step >= max_steps) throw ControllerTimeout("segment trigger did not fire within t_max");
  }
}

ParticleState sample_snapped(const ControlLaw& law, const ClosedLoopContext& ctx, Rng& rng) {
  const Scenario& s = *ctx.scenario;
  const Mat& chol = ctx.steady_chol.at(static_cast<std::size_t>(law.index));
  constexpr int kMaxAttempts = 100000;
  for (int a = 0; a < kMaxAttempts; ++a) {
    Vec x = law.arrival_state + sample_gaussian(rng, chol);
    if (!in_collision(x, s.footprint, s.workspace)) return ParticleState{x, GaussianBelief{law.arrival_state, law.steady_cov}};
  }
  throw NumericalError("stabilized belief at waypoint " + std::to_string(law.index) + " lies almost entirely in collision");
}

CostBreakdown segment_costs(const SegmentResult& r, const Scenario& s) {
  const double boot_rate = s.boot.energy / s.boot.time;
  const double loc = s.power.on * r.t_on + boot_rate * r.t_boot;
  const double dur = r.duration();
  return CostBreakdown{s.power.base * dur + loc, loc, dur};
}

}  // namespace locsched
