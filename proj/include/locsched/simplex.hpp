#pragma once

#include <vector>

namespace locsched {

enum class Sense { Le, Ge, Eq };

struct LpRow {
  std::vector<double> a;  // dense, one entry per variable
  Sense sense;
  double b;
};

/// minimize c.x subject to rows, x >= 0
struct LinearProgram {
  int n = 0;
  std::vector<double> c;
  std::vector<LpRow> rows;

  void add_row(std::vector<double> a, Sense sense, double b) { rows.push_back({std::move(a), sense, b}); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  int pivots = 0;
};

/// Dense two-phase tableau simplex. Pricing is Dantzig's rule; after a run
/// of degenerate pivots it switches to Bland's rule, which cannot cycle.
LpResult solve_lp(const LinearProgram& lp, double tol = 1e-9);

}  // namespace locsched
