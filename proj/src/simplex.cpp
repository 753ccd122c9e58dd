#include "locsched/simplex.hpp"

#include "locsched/types.hpp"

#include <cmath>
#include <limits>

namespace locsched {

namespace {

class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), w_(cols + 1), t_(static_cast<std::size_t>(rows) * (cols + 1), 0.0) {}

  double& at(int r, int c) { return t_[static_cast<std::size_t>(r) * w_ + c]; }
  double at(int r, int c) const { return t_[static_cast<std::size_t>(r) * w_ + c]; }
  double& rhs(int r) { return at(r, w_ - 1); }
  double rhs(int r) const { return at(r, w_ - 1); }
  int rows() const { return m_; }
  int cols() const { return w_ - 1; }

  // Pivot on (pr, pc); `obj` is the reduced-cost row (size cols + 1).
  void pivot(int pr, int pc, std::vector<double>& obj) {
    double* prow = &t_[static_cast<std::size_t>(pr) * w_];
    const double inv = 1.0 / prow[pc];
    for (int c = 0; c < w_; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (int r = 0; r < m_; ++r) {
      if (r == pr) continue;
      double* row = &t_[static_cast<std::size_t>(r) * w_];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (int c = 0; c < w_; ++c) row[c] -= f * prow[c];
      row[pc] = 0.0;
    }
    const double f = obj[static_cast<std::size_t>(pc)];
    if (f != 0.0) {
      for (int c = 0; c < w_; ++c) obj[static_cast<std::size_t>(c)] -= f * prow[c];
      obj[static_cast<std::size_t>(pc)] = 0.0;
    }
  }

 private:
  int m_;
  int w_;
  std::vector<double> t_;
};

enum class PhaseResult { Optimal, Unbounded };

// Minimizes the objective encoded by reduced costs `obj` (last entry holds
// minus the current objective value). Columns with allowed[c] == false never enter.
PhaseResult run_phase(Tableau& tab, std::vector<int>& basis, std::vector<double>& obj, const std::vector<char>& allowed,
                      double tol, int& pivots) {
  constexpr int kDegenerateSwitch = 50;
  int degenerate_run = 0;
  const long max_pivots = 50000L + 50L * (tab.rows() + tab.cols());
  while (true) {
    const bool bland = degenerate_run >= kDegenerateSwitch;
    int enter = -1;
    double best = -tol;
    for (int c = 0; c < tab.cols(); ++c) {
      if (!allowed[static_cast<std::size_t>(c)]) continue;
      const double d = obj[static_cast<std::size_t>(c)];
      if (d < best) {
        enter = c;
        if (bland) break;
        best = d;
      }
    }
    if (enter < 0) return PhaseResult::Optimal;
    int leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < tab.rows(); ++r) {
      const double a = tab.at(r, enter);
      if (a <= tol) continue;
      const double q = tab.rhs(r) / a;
      if (q < ratio - 1e-12 ||
          (q <= ratio + 1e-12 && leave >= 0 && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
        ratio = std::min(q, ratio);
        leave = r;
      }
    }
    if (leave < 0) return PhaseResult::Unbounded;
    degenerate_run = ratio <= tol ? degenerate_run + 1 : 0;
    tab.pivot(leave, enter, obj);
    basis[static_cast<std::size_t>(leave)] = enter;
    if (++pivots > max_pivots) throw NumericalError("simplex pivot limit exceeded");
  }
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol) {
  const int n = lp.n;
  if (static_cast<int>(lp.c.size()) != n) throw InvalidInput("LP objective has the wrong length");
  const int m = static_cast<int>(lp.rows.size());
  int n_slack = 0, n_art = 0;
  std::vector<Sense> sense(static_cast<std::size_t>(m));
  std::vector<double> sign(static_cast<std::size_t>(m), 1.0);
  for (int r = 0; r < m; ++r) {
    const LpRow& row = lp.rows[static_cast<std::size_t>(r)];
    if (static_cast<int>(row.a.size()) != n) throw InvalidInput("LP row has the wrong length");
    Sense s = row.sense;
    if (row.b < 0) {
      sign[static_cast<std::size_t>(r)] = -1.0;
      if (s == Sense::Le) s = Sense::Ge;
      else if (s == Sense::Ge) s = Sense::Le;
    }
    sense[static_cast<std::size_t>(r)] = s;
    if (s != Sense::Eq) ++n_slack;
    if (s != Sense::Le) ++n_art;
  }
  const int cols = n + n_slack + n_art;
  Tableau tab(m, cols);
  std::vector<int> basis(static_cast<std::size_t>(m), -1);
  std::vector<char> is_art(static_cast<std::size_t>(cols), 0);
  int next_slack = n, next_art = n + n_slack;
  for (int r = 0; r < m; ++r) {
    const LpRow& row = lp.rows[static_cast<std::size_t>(r)];
    const double sg = sign[static_cast<std::size_t>(r)];
    for (int c = 0; c < n; ++c) tab.at(r, c) = sg * row.a[static_cast<std::size_t>(c)];
    tab.rhs(r) = sg * row.b;
    switch (sense[static_cast<std::size_t>(r)]) {
      case Sense::Le:
        tab.at(r, next_slack) = 1.0;
        basis[static_cast<std::size_t>(r)] = next_slack++;
        break;
      case Sense::Ge:
        tab.at(r, next_slack++) = -1.0;
        [[fallthrough]];
      case Sense::Eq:
        tab.at(r, next_art) = 1.0;
        is_art[static_cast<std::size_t>(next_art)] = 1;
        basis[static_cast<std::size_t>(r)] = next_art++;
        break;
    }
  }

  LpResult res;
  std::vector<char> allowed(static_cast<std::size_t>(cols), 1);
  if (n_art > 0) {
    std::vector<double> obj(static_cast<std::size_t>(cols) + 1, 0.0);
    for (int r = 0; r < m; ++r) {
      if (!is_art[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])]) continue;
      for (int c = 0; c <= cols; ++c) obj[static_cast<std::size_t>(c)] -= tab.at(r, c);
    }
    for (int c = 0; c < cols; ++c) {
      if (is_art[static_cast<std::size_t>(c)]) obj[static_cast<std::size_t>(c)] = 0.0;
    }
    run_phase(tab, basis, obj, allowed, tol, res.pivots);
    double infeas = 0.0;
    for (int r = 0; r < m; ++r) {
      if (is_art[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])]) infeas += tab.rhs(r);
    }
    double scale = 1.0;
    for (const LpRow& row : lp.rows) scale = std::max(scale, std::abs(row.b));
    if (infeas > 1e-7 * scale) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    // Drive remaining artificials out of the basis where possible.
    std::vector<double> dummy(static_cast<std::size_t>(cols) + 1, 0.0);
    for (int r = 0; r < m; ++r) {
      if (!is_art[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])]) continue;
      int pc = -1;
      double best = tol;
      for (int c = 0; c < cols; ++c) {
        if (is_art[static_cast<std::size_t>(c)]) continue;
        if (std::abs(tab.at(r, c)) > best) {
          best = std::abs(tab.at(r, c));
          pc = c;
        }
      }
      if (pc >= 0) {
        tab.pivot(r, pc, dummy);
        basis[static_cast<std::size_t>(r)] = pc;
      }
      // Otherwise the row is redundant; its artificial stays basic at zero.
    }
    for (int c = 0; c < cols; ++c) {
      if (is_art[static_cast<std::size_t>(c)]) allowed[static_cast<std::size_t>(c)] = 0;
    }
  }

  std::vector<double> obj(static_cast<std::size_t>(cols) + 1, 0.0);
  for (int c = 0; c < n; ++c) obj[static_cast<std::size_t>(c)] = lp.c[static_cast<std::size_t>(c)];
  for (int r = 0; r < m; ++r) {
    const int b = basis[static_cast<std::size_t>(r)];
    const double cb = b < n ? lp.c[static_cast<std::size_t>(b)] : 0.0;
    if (cb == 0.0) continue;
    for (int c = 0; c <= cols; ++c) obj[static_cast<std::size_t>(c)] -= cb * tab.at(r, c);
  }
  if (run_phase(tab, basis, obj, allowed, tol, res.pivots) == PhaseResult::Unbounded) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  res.status = LpStatus::Optimal;
  res.x.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < m; ++r) {
    const int b = basis[static_cast<std::size_t>(r)];
    if (b < n) res.x[static_cast<std::size_t>(b)] = std::max(0.0, tab.rhs(r));
  }
  res.objective = 0.0;
  for (int c = 0; c < n; ++c) res.objective += lp.c[static_cast<std::size_t>(c)] * res.x[static_cast<std::size_t>(c)];
  return res;
}

}  // namespace locsched
