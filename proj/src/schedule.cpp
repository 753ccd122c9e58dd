#include "locsched/schedule.hpp"

#include <cmath>

namespace locsched {

const char* to_string(LocAction a) {
  switch (a) {
    case LocAction::Off:
      return "off";
    case LocAction::On:
      return "on";
    case LocAction::Sbo:
      return "sbo";
  }
  return "?";
}

const char* to_string(TimedAction a) {
  switch (a) {
    case TimedAction::Start:
      return "start";
    case TimedAction::Boot:
      return "boot";
    case TimedAction::On:
      return "on";
    case TimedAction::Off:
      return "off";
  }
  return "?";
}

namespace {

std::optional<LocAction> parse_action(const std::string& label) {
  if (label == "off") return LocAction::Off;
  if (label == "on") return LocAction::On;
  if (label == "sbo") return LocAction::Sbo;
  return std::nullopt;
}

BootPlan boot_plan(const std::vector<double>& durations, int i, double boot_time) {
  const int n = static_cast<int>(durations.size()) - 1;
  double sum = 0.0;
  for (int m = i + 1; m <= n; ++m) {
    const double next = sum + durations[static_cast<std::size_t>(m)];
    if (next > boot_time) return {i, m, boot_time - sum};
    sum = next;
  }
  throw ScheduleDomainError("boot started at waypoint " + std::to_string(i) + " cannot complete");
}

}  // namespace

Schedule policy_to_schedule(const Policy& pi, const BeliefMdp& mdp) {
  validate_policy(mdp, pi);
  Schedule out;
  out.segments = mdp.num_segments();
  out.nominal_durations = mdp.nominal_durations;
  out.boot_time = mdp.boot_time;
  for (int s = 0; s < mdp.num_states(); ++s) {
    const MdpState& st = mdp.states[static_cast<std::size_t>(s)];
    if (st.role != StateRole::Node || st.i >= out.segments) continue;
    NodeSchedule node;
    const auto& acts = mdp.actions[static_cast<std::size_t>(s)];
    for (std::size_t a = 0; a < acts.size(); ++a) {
      const double p = pi.probs[static_cast<std::size_t>(s)][a];
      if (p <= 0.0) continue;
      const auto la = parse_action(acts[a].label);
      if (!la) throw InvalidPolicy("action '" + acts[a].label + "' at " + st.id + " is not a localization action");
      node.dist.emplace_back(*la, p);
      if (*la == LocAction::Sbo) node.boot = boot_plan(out.nominal_durations, st.i, out.boot_time);
    }
    out.nodes[{st.i, st.j}] = std::move(node);
  }
  return out;
}

Schedule baseline_schedule(const BeliefMdp& mdp, LocAction a) {
  return policy_to_schedule(label_policy(mdp, to_string(a)), mdp);
}

LocAction schedule_lookup(const Schedule& s, int i, int j, Rng& rng) {
  const auto it = s.nodes.find({i, j});
  if (it == s.nodes.end()) {
    throw ScheduleDomainError("schedule has no entry for node (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  const auto& dist = it->second.dist;
  if (dist.size() == 1) return dist.front().first;
  const double u = uniform01(rng);
  double acc = 0.0;
  for (const auto& [a, p] : dist) {
    acc += p;
    if (u < acc) return a;
  }
  return dist.back().first;
}

Schedule presample_schedule(const Schedule& s, std::uint64_t seed) {
  Schedule out = s;
  Rng rng = make_rng(seed, {});
  for (auto& [key, node] : out.nodes) {
    const LocAction a = schedule_lookup(s, key.first, key.second, rng);
    node.dist = {{a, 1.0}};
    if (a != LocAction::Sbo) node.boot.reset();
  }
  out.provenance["presample_seed"] = seed;
  return out;
}

std::vector<Violation> check_feasibility(const TimedActionTrace& trace, double boot_time) {
  std::vector<Violation> out;
  const auto& e = trace.entries;
  if (e.empty()) return out;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
  if (e[0].action != TimedAction::On && e[0].action != TimedAction::Off) out.push_back({"first action", 0});
  for (std::size_t k = 1; k < e.size(); ++k) {
    const TimedAction prev = e[k - 1].action;
    switch (e[k].action) {
      case TimedAction::Start:
        if (prev != TimedAction::Off) out.push_back({"start after off", k});
        break;
      case TimedAction::Boot:
        if (prev != TimedAction::Start && prev != TimedAction::Boot) out.push_back({"boot after start or boot", k});
        break;
      case TimedAction::On:
        if (prev != TimedAction::Boot && prev != TimedAction::On) out.push_back({"on after boot or on", k});
        break;
      case TimedAction::Off:
        if (prev == TimedAction::Start || prev == TimedAction::Boot) out.push_back({"off during boot", k});
        break;
    }
  }
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (e[k].action != TimedAction::Start) continue;
    const double done = e[k].t + boot_time;
    if (done >= trace.end_time || close(done, trace.end_time)) {
      out.push_back({"uncompletable boot", k});
    }
    // Boot entries until an on entry exactly at completion.
    std::size_t q = k + 1;
    bool ok = q < e.size() && e[q].action == TimedAction::Boot && close(e[q].t, e[k].t);
    while (ok && q < e.size() && e[q].action == TimedAction::Boot) {
      if (e[q].t > done + 1e-9 * std::max(1.0, done)) ok = false;
      ++q;
    }
    if (ok) ok = q < e.size() && e[q].action == TimedAction::On && close(e[q].t, done);
    if (!ok && done < trace.end_time) out.push_back({"boot duration", k});
  }
  for (std::size_t k = 1; k < e.size(); ++k) {
    if (e[k].t < e[k - 1].t) out.push_back({"time order", k});
  }
  return out;
}

TimedActionTrace sample_nominal_trace(const Schedule& s, Rng& rng) {
  TimedActionTrace tr;
  std::vector<double> t(static_cast<std::size_t>(s.segments) + 1, 0.0);
  for (int k = 1; k <= s.segments; ++k) t[static_cast<std::size_t>(k)] = t[static_cast<std::size_t>(k) - 1] + s.nominal_durations[static_cast<std::size_t>(k)];
  int i = 0, j = 0;
  while (i < s.segments) {
    const double ti = t[static_cast<std::size_t>(i)];
    switch (schedule_lookup(s, i, j, rng)) {
      case LocAction::Off:
        tr.entries.push_back({ti, TimedAction::Off});
        ++i;
        break;
      case LocAction::On:
        tr.entries.push_back({ti, TimedAction::On});
        j = ++i;
        break;
      case LocAction::Sbo: {
        const BootPlan& b = *s.nodes.at({i, j}).boot;
        tr.entries.push_back({ti, TimedAction::Start});
        for (int k = i; k < b.completion; ++k) tr.entries.push_back({t[static_cast<std::size_t>(k)], TimedAction::Boot});
        tr.entries.push_back({ti + s.boot_time, TimedAction::On});
        i = j = b.completion;
        break;
      }
    }
  }
  tr.end_time = t.back();
  return tr;
}

nlohmann::json schedule_to_json(const Schedule& s) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "schedule";
  j["segments"] = s.segments;
  j["nominal_durations"] = s.nominal_durations;
  j["boot_time"] = s.boot_time;
  j["nodes"] = nlohmann::json::array();
  for (const auto& [key, node] : s.nodes) {
    nlohmann::json jn;
    jn["i"] = key.first;
    jn["j"] = key.second;
    for (const auto& [a, p] : node.dist) jn["dist"][to_string(a)] = p;
    if (node.boot) jn["boot"] = {{"start", node.boot->start}, {"completion", node.boot->completion}, {"offset", node.boot->offset}};
    j["nodes"].push_back(jn);
  }
  j["provenance"] = s.provenance;
  return j;
}

Schedule schedule_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != 1) throw InvalidInput("unsupported schedule format_version");
    if (j.at("kind").get<std::string>() != "schedule") throw InvalidInput("document is not a schedule");
    Schedule s;
    s.segments = j.at("segments").get<int>();
    s.nominal_durations = j.at("nominal_durations").get<std::vector<double>>();
    s.boot_time = j.at("boot_time").get<double>();
    if (static_cast<int>(s.nominal_durations.size()) != s.segments + 1) throw InvalidInput("schedule duration list has the wrong length");
    for (const auto& jn : j.at("nodes")) {
      NodeSchedule node;
      double sum = 0.0;
      for (const auto& [label, p] : jn.at("dist").items()) {
        const auto a = parse_action(label);
        if (!a) throw InvalidInput("unknown schedule action '" + label + "'");
        node.dist.emplace_back(*a, p.get<double>());
        sum += p.get<double>();
      }
      if (node.dist.empty() || std::abs(sum - 1.0) > 1e-12) throw InvalidInput("schedule distribution does not sum to one");
      if (jn.contains("boot")) {
        const auto& b = jn["boot"];
        node.boot = BootPlan{b.at("start").get<int>(), b.at("completion").get<int>(), b.at("offset").get<double>()};
      }
      s.nodes[{jn.at("i").get<int>(), jn.at("j").get<int>()}] = std::move(node);
    }
    if (j.contains("provenance")) s.provenance = j["provenance"];
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed schedule document: ") + e.what());
  }
}

}  // namespace locsched
