#pragma once

#include "locsched/mdp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace locsched {

struct ScalarizedSolution {
  std::vector<int> choice;     // action index per state
  std::vector<double> value;   // natural orientation, one entry per objective
};

/// Maximizes sum_k w_k * (+v_k for maximized, -v_k for minimized objectives)
/// by backward induction. Ties go to the lowest action index.
ScalarizedSolution scalarize_solve(const BeliefMdp& mdp, const ObjectiveSpec& obj, const std::vector<double>& weights);

struct FrontVertex {
  std::vector<double> value;  // natural orientation
  std::vector<int> choice;    // deterministic policy
};

struct SupportingWeight {
  std::vector<double> weight;  // in normalized, all-maximize coordinates
  double support;              // max of weight . x over achievable x, same coordinates
};

struct ParetoFront {
  ObjectiveSpec objectives;
  std::vector<FrontVertex> vertices;
  std::vector<SupportingWeight> facets;
  std::vector<double> scale;  // normalization per objective
  double refinement_gap = 0.0;
  int queries = 0;
};

struct FrontOptions {
  double gap_tol = 1e-6;
  int max_queries = 2000;
  int grid_weights = 512;        // four objectives only
  int validation_weights = 128;  // four objectives only
};

ParetoFront compute_front(const BeliefMdp& mdp, const ObjectiveSpec& obj, const FrontOptions& opt = {});

/// Removes points weakly dominated by convex combinations of the others
/// (all-maximize orientation, tolerance tol). Returns surviving indices in input order.
std::vector<int> nondominated_hull_filter(const std::vector<std::vector<double>>& oriented, double tol = 1e-9);

struct Bound {
  int objective;  // index into the ObjectiveSpec
  double value;   // >= for maximized objectives, <= for minimized ones
};

struct TargetPoint {
  std::optional<int> vertex;            // select a stored front vertex
  std::vector<Bound> bounds;
  std::vector<int> optimize_order;      // free objectives in lexicographic order; empty = default
};

/// Parses "vertex:3" or "ptarg>=0.99,pcoll<=0.01[;order=energy,pcoll]".
TargetPoint parse_point_selector(const std::string& text, const ObjectiveSpec& obj);

struct SynthesisResult {
  Policy policy;
  std::vector<double> value;
};

/// Occupation-measure LP. Throws UnachievablePoint, carrying the nearest
/// achievable vector, when the bounds cannot be met.
SynthesisResult synthesize_policy(const BeliefMdp& mdp, const ObjectiveSpec& obj, const TargetPoint& point,
                                  const ParetoFront* front = nullptr);

/// Nearest point of conv(front vertices) to the region allowed by `bounds`,
/// Euclidean in natural units of the bounded objectives.
std::vector<double> project_onto_front(const ParetoFront& front, const std::vector<Bound>& bounds);

struct SavingsRow {
  std::vector<double> value;
  std::vector<std::optional<double>> savings;  // percent per objective; empty for probabilities or zero baselines
};

std::vector<SavingsRow> savings_report(const ParetoFront& front, const std::vector<double>& baseline);

/// Percent saved relative to a baseline; nullopt when the baseline is zero.
std::optional<double> percent_saved(double baseline, double value);

/// Vertex policies are stored by state id and action label.
nlohmann::json front_to_json(const ParetoFront& front, const BeliefMdp& mdp);
ParetoFront front_from_json(const nlohmann::json& j, const BeliefMdp& mdp);

}  // namespace locsched
