#include "locsched/abstraction.hpp"
#include "locsched/io.hpp"
#include "locsched/pareto.hpp"
#include "locsched/scenario.hpp"
#include "locsched/schedule.hpp"
#include "locsched/simharness.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <sstream>

using namespace locsched;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string fmt_pct(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << *v;
  return os.str();
}

std::string csv_path_for(const std::string& json_path) {
  const auto dot = json_path.rfind('.');
  const auto slash = json_path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return json_path + ".csv";
  return json_path.substr(0, dot) + ".csv";
}

BeliefMdp load_mdp(const std::string& path, std::string* bytes = nullptr) {
  const std::string text = read_text_file(path);
  if (bytes) *bytes = text;
  try {
    return mdp_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
}

json load_json(const std::string& path, std::string* bytes = nullptr) {
  const std::string text = read_text_file(path);
  if (bytes) *bytes = text;
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
}

void cmd_abstract(const std::string& scenario_path, int particles, std::uint64_t seed, const std::string& out) {
  const std::string text = read_text_file(scenario_path);
  const Scenario s = load_scenario_yaml(text, scenario_path);
  BeliefMdp mdp = build_mdp(s, {particles, seed, Exec::Parallel});
  json prov = make_provenance("abstract");
  add_input(prov, "scenario", scenario_path, text);
  prov["parameters"] = {{"particles", particles}, {"seed", seed}, {"scenario_name", s.name}};
  mdp.provenance = prov;
  write_text_file(out, dump_json(mdp_to_json(mdp)));
}

void cmd_pareto(const std::string& mdp_path, const std::vector<std::string>& objectives, double gap_tol, int max_queries,
                const std::string& out) {
  std::string bytes;
  const BeliefMdp mdp = load_mdp(mdp_path, &bytes);
  const ObjectiveSpec obj = make_objectives(objectives, mdp);
  FrontOptions opt;
  opt.gap_tol = gap_tol;
  opt.max_queries = max_queries;
  const ParetoFront front = compute_front(mdp, obj, opt);

  json j = front_to_json(front, mdp);
  json prov = make_provenance("pareto");
  add_input(prov, "mdp", mdp_path, bytes);
  prov["parameters"] = {{"objectives", objectives}, {"gap_tol", gap_tol}, {"max_queries", max_queries}};
  prov["upstream"] = mdp.provenance;
  j["provenance"] = prov;
  j["metric_names"] = validation_quantities();
  const std::vector<double> on = theoretical_values(mdp, label_policy(mdp, "on"));
  const std::vector<double> off = theoretical_values(mdp, label_policy(mdp, "off"));
  j["baselines"] = {{"on", on}, {"off", off}};
  for (std::size_t v = 0; v < front.vertices.size(); ++v) {
    j["vertices"][v]["metrics"] = theoretical_values(mdp, deterministic_policy(mdp, front.vertices[v].choice));
  }
  write_text_file(out, dump_json(j));

  // CSV: objective values, then savings over the always-on baseline.
  std::ostringstream csv;
  csv << csv_preamble(prov);
  csv << "vertex";
  for (const auto& q : validation_quantities()) csv << ',' << q;
  csv << ",energy_saved_pct,loc_energy_saved_pct\n";
  for (std::size_t v = 0; v < front.vertices.size(); ++v) {
    const auto m = j["vertices"][v]["metrics"].get<std::vector<double>>();
    csv << v;
    for (double x : m) csv << ',' << fmt(x);
    csv << ',' << fmt_pct(percent_saved(on[2], m[2])) << ',' << fmt_pct(percent_saved(on[3], m[3])) << '\n';
  }
  write_text_file(csv_path_for(out), csv.str());
}

void cmd_synthesize(const std::string& mdp_path, const std::string& front_path, const std::string& selector,
                    const std::string& out, std::optional<std::uint64_t> presample) {
  std::string mdp_bytes, front_bytes;
  const BeliefMdp mdp = load_mdp(mdp_path, &mdp_bytes);
  const json jf = load_json(front_path, &front_bytes);
  const ParetoFront front = front_from_json(jf, mdp);
  const TargetPoint tp = parse_point_selector(selector, front.objectives);
  const SynthesisResult res = synthesize_policy(mdp, front.objectives, tp, &front);
  Schedule sched = policy_to_schedule(res.policy, mdp);
  if (presample) sched = presample_schedule(sched, *presample);
  json prov = make_provenance("synthesize");
  add_input(prov, "mdp", mdp_path, mdp_bytes);
  add_input(prov, "front", front_path, front_bytes);
  prov["parameters"] = {{"point", selector}};
  if (presample) prov["parameters"]["presample_seed"] = *presample;
  prov["upstream"] = jf.value("provenance", json::object());
  json j = schedule_to_json(sched);
  j["provenance"] = prov;
  j["achieved"] = res.value;
  j["theoretical"] = theoretical_values(mdp, res.policy);
  j["policy"] = policy_to_json(mdp, res.policy);
  write_text_file(out, dump_json(j));
}

void cmd_simulate(const std::string& scenario_path, const std::string& schedule_path, int runs, std::uint64_t seed,
                  const std::string& out, const std::string& svg, const std::string& traces) {
  const std::string text = read_text_file(scenario_path);
  const Scenario s = load_scenario_yaml(text, scenario_path);
  std::string sched_bytes;
  const json js = load_json(schedule_path, &sched_bytes);
  const Schedule sched = schedule_from_json(js);
  if (!js.contains("theoretical")) throw InvalidInput("schedule file carries no theoretical values");
  const auto theoretical = js["theoretical"].get<std::vector<double>>();
  const bool want_samples = !svg.empty() || !traces.empty();
  const ValidationReport rep = validate(s, sched, theoretical, runs, seed, Exec::Parallel, want_samples ? 20 : 0);
  constexpr double kProbAllowance = 0.03, kCostRel = 0.05;
  json j = report_to_json(rep, kProbAllowance, kCostRel);
  json prov = make_provenance("simulate");
  add_input(prov, "scenario", scenario_path, text);
  add_input(prov, "schedule", schedule_path, sched_bytes);
  prov["parameters"] = {{"runs", runs}, {"seed", seed}};
  prov["upstream"] = js.value("provenance", json::object());
  j["provenance"] = prov;
  write_text_file(out, dump_json(j));
  if (!traces.empty()) {
    std::ostringstream os;
    os << csv_preamble(prov);
    write_traces_csv(os, rep.samples);
    write_text_file(traces, os.str());
  }
  if (!svg.empty()) {
    std::string body = render_svg(s, rep.samples);
    body.insert(body.find('\n') + 1, "<!-- provenance: " + prov.dump() + " -->\n");
    write_text_file(svg, body);
  }
}

void cmd_report(const std::vector<std::string>& front_paths, const std::string& baseline, const std::string& out) {
  json prov = make_provenance("report");
  prov["parameters"] = {{"baseline", baseline}};
  std::ostringstream csv;
  std::ostringstream rows;
  std::vector<std::string> names;
  for (std::size_t f = 0; f < front_paths.size(); ++f) {
    std::string bytes;
    const json j = load_json(front_paths[f], &bytes);
    add_input(prov, "front" + std::to_string(f), front_paths[f], bytes);
    if (j.value("kind", "") != "pareto_front") throw InvalidInput("'" + front_paths[f] + "' is not a front file");
    if (!j.contains("vertices") || j["vertices"].empty()) throw InvalidInput("front '" + front_paths[f] + "' has no vertices");
    if (!j.contains("baselines") || !j["baselines"].contains(baseline)) {
      throw InvalidInput("front '" + front_paths[f] + "' has no '" + baseline + "' baseline");
    }
    names = j.at("metric_names").get<std::vector<std::string>>();
    const auto base = j["baselines"][baseline].get<std::vector<double>>();
    std::string label = front_paths[f];
    if (j.contains("provenance")) {
      label = j["provenance"].value("upstream", json::object()).value("parameters", json::object()).value("scenario_name", label);
    }
    for (std::size_t v = 0; v < j["vertices"].size(); ++v) {
      const auto m = j["vertices"][v].at("metrics").get<std::vector<double>>();
      rows << label << ',' << v;
      for (double x : m) rows << ',' << fmt(x);
      for (std::size_t q = 2; q < m.size(); ++q) rows << ',' << fmt_pct(percent_saved(base[q], m[q]));
      rows << '\n';
    }
  }
  csv << csv_preamble(prov) << "front,vertex";
  for (const auto& n : names) csv << ',' << n;
  for (std::size_t q = 2; q < names.size(); ++q) csv << ',' << names[q] << "_saved_pct";
  csv << '\n' << rows.str();
  write_text_file(out, csv.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localization scheduling toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = runtime default)")->check(CLI::NonNegativeNumber);

  std::string scenario, out, mdp_path, front_path, point, schedule_path, svg, traces, baseline = "on";
  int particles = 2000, runs = 1000, max_queries = 2000;
  std::uint64_t seed = 0;
  double gap_tol = 1e-6;
  std::vector<std::string> objectives{"ptarg", "pcoll", "energy"};
  std::vector<std::string> fronts;
  std::optional<std::uint64_t> presample;

  auto* ab = app.add_subcommand("abstract", "Build the belief MDP of a scenario");
  ab->add_option("--scenario", scenario)->required();
  ab->add_option("--particles", particles)->check(CLI::PositiveNumber);
  ab->add_option("--seed", seed);
  ab->add_option("--out", out)->required();

  auto* pa = app.add_subcommand("pareto", "Compute the Pareto front of an MDP");
  pa->add_option("--mdp", mdp_path)->required();
  pa->add_option("--objectives", objectives)->delimiter(',');
  pa->add_option("--gap-tol", gap_tol)->check(CLI::PositiveNumber);
  pa->add_option("--max-queries", max_queries)->check(CLI::PositiveNumber);
  pa->add_option("--out", out, "Front JSON; the CSV is written next to it")->required();

  auto* sy = app.add_subcommand("synthesize", "Synthesize a schedule for a point of the front");
  sy->add_option("--mdp", mdp_path)->required();
  sy->add_option("--front", front_path)->required();
  sy->add_option("--point", point, "vertex:K or bounds such as ptarg>=0.99,pcoll<=0.01")->required();
  sy->add_option("--presample", presample, "Resolve randomized nodes once with this seed");
  sy->add_option("--out", out)->required();

  auto* si = app.add_subcommand("simulate", "Monte Carlo validation of a schedule");
  si->add_option("--scenario", scenario)->required();
  si->add_option("--schedule", schedule_path)->required();
  si->add_option("--runs", runs)->check(CLI::PositiveNumber);
  si->add_option("--seed", seed);
  si->add_option("--out", out)->required();
  si->add_option("--svg", svg);
  si->add_option("--traces", traces, "CSV of decimated traces of the first runs");

  auto* re = app.add_subcommand("report", "Savings table relative to a baseline schedule");
  re->add_option("--front", fronts)->required();
  re->add_option("--baseline", baseline)->check(CLI::IsMember({"on", "off"}));
  re->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  set_thread_count(threads);
  try {
    if (*ab) cmd_abstract(scenario, particles, seed, out);
    if (*pa) cmd_pareto(mdp_path, objectives, gap_tol, max_queries, out);
    if (*sy) cmd_synthesize(mdp_path, front_path, point, out, presample);
    if (*si) cmd_simulate(scenario, schedule_path, runs, seed, out, svg, traces);
    if (*re) cmd_report(fronts, baseline, out);
  } catch (const UnachievablePoint& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
