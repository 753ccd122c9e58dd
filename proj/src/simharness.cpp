#include "locsched/simharness.hpp"

#include "locsched/abstraction.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace locsched {

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Collision:
      return "collision";
    case Outcome::Target:
      return "target";
    case Outcome::Free:
      return "free";
  }
  return "?";
}

RunRecord simulate_mission(const ClosedLoopContext& ctx, const Schedule& schedule, std::uint64_t seed, bool keep_trace) {
  const Scenario& s = *ctx.scenario;
  const int n = s.num_segments();
  if (schedule.segments != n) throw ScheduleDomainError("schedule and scenario disagree on the number of segments");
  Rng rng = make_rng(seed, {});
  RunRecord rec;
  rec.cost = {0.0, 0.0, 0.0};
  std::vector<TraceSample>* trace = keep_trace ? &rec.trace : nullptr;
  ParticleState p = sample_snapped(ctx.law(0), ctx, rng);
  double t = 0.0;
  auto run = [&](int law, SegmentMode mode) {
    const SegmentResult r = run_segment(p, ctx.law(law), mode, ctx, rng, trace, t);
    const CostBreakdown c = segment_costs(r, s);
    rec.cost[0] += c.energy;
    rec.cost[1] += c.loc_energy;
    rec.cost[2] += c.duration;
    t += r.duration();
    p = r.end;
    return !r.collided;
  };
  int i = 0, j = 0;
  bool alive = true;
  while (alive && i < n) {
    switch (schedule_lookup(schedule, i, j, rng)) {
      case LocAction::Off:
        rec.actions.entries.push_back({t, TimedAction::Off});
        alive = run(i + 1, {SegmentKind::Off, 0.0});
        ++i;
        break;
      case LocAction::On:
        rec.actions.entries.push_back({t, TimedAction::On});
        alive = run(i + 1, {SegmentKind::On, 0.0});
        j = ++i;
        break;
      case LocAction::Sbo: {
        const BootPlan& b = *schedule.nodes.at({i, j}).boot;
        const double t_start = t;
        rec.actions.entries.push_back({t, TimedAction::Start});
        for (int k = i + 1; alive && k < b.completion; ++k) {
          rec.actions.entries.push_back({t, TimedAction::Boot});
          alive = run(k, {SegmentKind::Boot, 0.0});
        }
        if (alive) {
          rec.actions.entries.push_back({t, TimedAction::Boot});
          alive = run(b.completion, {SegmentKind::BootingTail, schedule.boot_time - (t - t_start)});
          rec.actions.entries.push_back({t_start + schedule.boot_time, TimedAction::On});
        }
        i = j = b.completion;
        break;
      }
    }
  }
  rec.actions.end_time = t;
  if (!alive) {
    rec.outcome = Outcome::Collision;
  } else {
    rec.outcome = in_target(p.x, s.footprint, s.workspace) ? Outcome::Target : Outcome::Free;
  }
  return rec;
}

RunRecord simulate_mission(const Scenario& s, const Schedule& schedule, std::uint64_t seed) {
  const ClosedLoopContext ctx = make_context(s);
  return simulate_mission(ctx, schedule, seed, true);
}

const std::vector<std::string>& validation_quantities() {
  static const std::vector<std::string> q{"ptarg", "pcoll", "energy", "loc_energy", "duration"};
  return q;
}

std::vector<double> theoretical_values(const BeliefMdp& mdp, const Policy& pi) {
  return evaluate_policy(mdp, pi, make_objectives(validation_quantities(), mdp));
}

namespace {

struct Kahan {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

ValidationReport validate(const Scenario& s, const Schedule& schedule, const std::vector<double>& theoretical, int runs,
                          std::uint64_t seed, Exec exec, int keep_samples) {
  if (runs < 1) throw InvalidInput("run count must be positive");
  if (theoretical.size() != validation_quantities().size()) throw InvalidInput("theoretical vector has the wrong length");
  const ClosedLoopContext ctx = make_context(s);
  std::vector<RunRecord> recs(static_cast<std::size_t>(runs));
  for_each_index(runs, exec, [&](int r) {
    recs[static_cast<std::size_t>(r)] =
        simulate_mission(ctx, schedule, stream_key(seed, {static_cast<std::uint64_t>(r)}), r < keep_samples);
  });
  ValidationReport rep;
  rep.runs = runs;
  rep.theoretical = theoretical;
  const std::size_t nq = validation_quantities().size();
  std::vector<Kahan> sum(nq), sq(nq);
  for (const RunRecord& rec : recs) {
    ++rep.outcomes[static_cast<std::size_t>(rec.outcome)];
    const double v[5] = {rec.outcome == Outcome::Target ? 1.0 : 0.0, rec.outcome == Outcome::Collision ? 1.0 : 0.0,
                         rec.cost[0], rec.cost[1], rec.cost[2]};
    for (std::size_t q = 0; q < nq; ++q) {
      sum[q].add(v[q]);
      sq[q].add(v[q] * v[q]);
    }
  }
  const double nr = static_cast<double>(runs);
  for (std::size_t q = 0; q < nq; ++q) {
    const double mean = sum[q].sum / nr;
    const double var = runs > 1 ? std::max(0.0, (sq[q].sum - nr * mean * mean) / (nr - 1.0)) : 0.0;
    rep.empirical.push_back({mean, 1.96 * std::sqrt(var / nr)});
    rep.deviation.push_back(mean - theoretical[q]);
  }
  for (int r = 0; r < std::min(keep_samples, runs); ++r) rep.samples.push_back(std::move(recs[static_cast<std::size_t>(r)]));
  return rep;
}

std::vector<bool> consistency(const ValidationReport& r, double prob_allowance, double cost_rel) {
  std::vector<bool> ok;
  for (std::size_t q = 0; q < r.empirical.size(); ++q) {
    const double th = r.theoretical[q];
    if (q < 2) {
      const double sigma = std::sqrt(std::max(0.0, th * (1.0 - th)) / r.runs);
      ok.push_back(std::abs(r.deviation[q]) <= std::max(3.0 * sigma, prob_allowance));
    } else {
      ok.push_back(std::abs(r.deviation[q]) <= cost_rel * std::abs(th) + 1e-9);
    }
  }
  return ok;
}

std::vector<TraceSample> decimate(const std::vector<TraceSample>& trace, std::size_t max_points) {
  if (trace.size() <= max_points) return trace;
  std::vector<char> keep(trace.size(), 0);
  std::size_t kept = 0;
  auto mark = [&](std::size_t k) {
    if (!keep[k]) {
      keep[k] = 1;
      ++kept;
    }
  };
  mark(0);
  mark(trace.size() - 1);
  for (std::size_t k = 1; k < trace.size() && kept + 2 <= max_points; ++k) {
    if (trace[k].status != trace[k - 1].status) {
      mark(k - 1);
      mark(k);
    }
  }
  const std::size_t budget = max_points > kept ? max_points - kept : 0;
  if (budget > 0) {
    const std::size_t stride = (trace.size() + budget - 1) / budget;
    for (std::size_t k = 0; k < trace.size() && kept < max_points; k += stride) mark(k);
  }
  std::vector<TraceSample> out;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (keep[k]) out.push_back(trace[k]);
  }
  return out;
}

nlohmann::json report_to_json(const ValidationReport& r, double prob_allowance, double cost_rel) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "validation_report";
  j["runs"] = r.runs;
  j["outcomes"] = {{"collision", r.outcomes[0]}, {"target", r.outcomes[1]}, {"free", r.outcomes[2]}};
  j["confidence"] = "95% normal approximation";
  j["tolerance"] = {{"probability_allowance", prob_allowance}, {"cost_relative", cost_rel}};
  const std::vector<bool> ok = consistency(r, prob_allowance, cost_rel);
  for (std::size_t q = 0; q < r.empirical.size(); ++q) {
    j["quantities"].push_back({{"name", validation_quantities()[q]},
                               {"empirical", r.empirical[q].mean},
                               {"half_width", r.empirical[q].half_width},
                               {"theoretical", r.theoretical[q]},
                               {"deviation", r.deviation[q]},
                               {"within_tolerance", static_cast<bool>(ok[q])}});
  }
  return j;
}

void write_traces_csv(std::ostream& os, const std::vector<RunRecord>& runs) {
  std::size_t dim = 0;
  for (const RunRecord& r : runs) {
    if (!r.trace.empty()) dim = static_cast<std::size_t>(r.trace.front().x.size());
  }
  os << "run,t";
  for (std::size_t k = 0; k < dim; ++k) os << ",x" << k;
  for (std::size_t k = 0; k < dim; ++k) os << ",est" << k;
  os << ",cov_trace,status\n";
  os << std::setprecision(10);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const TraceSample& s : decimate(runs[r].trace, 2000)) {
      os << r << ',' << s.t;
      for (Eigen::Index k = 0; k < s.x.size(); ++k) os << ',' << s.x(k);
      for (Eigen::Index k = 0; k < s.est.size(); ++k) os << ',' << s.est(k);
      os << ',' << s.cov_trace << ',' << to_string(s.status) << '\n';
    }
  }
}

namespace {

const char* status_color(LocStatus s) {
  switch (s) {
    case LocStatus::Off:
      return "#9ecae1";
    case LocStatus::Boot:
      return "#4292c6";
    case LocStatus::On:
      return "#08306b";
  }
  return "#000000";
}

}  // namespace

std::string render_svg(const Scenario& s, const std::vector<RunRecord>& runs) {
  const Rect& b = s.workspace.bounds;
  const double scale = 800.0 / std::max(b.x1 - b.x0, b.y1 - b.y0);
  auto px = [&](double x) { return (x - b.x0) * scale; };
  auto py = [&](double y) { return (b.y1 - y) * scale; };
  auto ycoord = [](const Vec& v) { return v.size() > 1 ? v(1) : 0.0; };
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(b.x1) << "\" height=\"" << py(b.y0) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << px(b.x1) << "\" height=\"" << py(b.y0) << "\" fill=\"white\" stroke=\"black\"/>\n";
  auto shape = [&](const Shape& sh, const char* fill) {
    if (const auto* r = std::get_if<Rect>(&sh)) {
      os << "<rect x=\"" << px(r->x0) << "\" y=\"" << py(r->y1) << "\" width=\"" << (r->x1 - r->x0) * scale << "\" height=\""
         << (r->y1 - r->y0) * scale << "\" fill=\"" << fill << "\"/>\n";
    } else {
      const auto& c = std::get<Circle>(sh);
      os << "<circle cx=\"" << px(c.cx) << "\" cy=\"" << py(c.cy) << "\" r=\"" << c.r * scale << "\" fill=\"" << fill << "\"/>\n";
    }
  };
  for (const Shape& o : s.workspace.obstacles) shape(o, "#555555");
  shape(s.workspace.target, "#74c476");
  for (const auto& w : s.waypoints) {
    os << "<circle cx=\"" << px(w(0)) << "\" cy=\"" << py(ycoord(w)) << "\" r=\"3\" fill=\"#c6dbef\" stroke=\"#6baed6\"/>\n";
  }
  for (const RunRecord& r : runs) {
    const std::vector<TraceSample> tr = decimate(r.trace, 2000);
    std::size_t k = 0;
    while (k + 1 < tr.size()) {
      const LocStatus st = tr[k + 1].status;
      os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << status_color(st) << "\" points=\"";
      os << px(tr[k].x(0)) << ',' << py(ycoord(tr[k].x));
      while (k + 1 < tr.size() && tr[k + 1].status == st) {
        ++k;
        os << ' ' << px(tr[k].x(0)) << ',' << py(ycoord(tr[k].x));
      }
      os << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace locsched
