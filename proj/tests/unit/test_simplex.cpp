#include "locsched/simplex.hpp"

#include <doctest.h>

using namespace locsched;

TEST_CASE("textbook maximization") {
  LinearProgram lp;
  lp.n = 2;
  lp.c = {-3, -5};
  lp.add_row({1, 0}, Sense::Le, 4);
  lp.add_row({0, 2}, Sense::Le, 12);
  lp.add_row({3, 2}, Sense::Le, 18);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(2.0));
  CHECK(r.x[1] == doctest::Approx(6.0));
  CHECK(r.objective == doctest::Approx(-36.0));
}

TEST_CASE("equality and >= rows go through phase one") {
  LinearProgram lp;
  lp.n = 2;
  lp.c = {1, 1};
  lp.add_row({1, 1}, Sense::Ge, 2);
  lp.add_row({1, -1}, Sense::Eq, 0.5);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(1.25));
  CHECK(r.x[1] == doctest::Approx(0.75));
}

TEST_CASE("infeasible and unbounded programs") {
  LinearProgram inf;
  inf.n = 1;
  inf.c = {1};
  inf.add_row({1}, Sense::Ge, 2);
  inf.add_row({1}, Sense::Le, 1);
  CHECK(solve_lp(inf).status == LpStatus::Infeasible);

  LinearProgram unb;
  unb.n = 2;
  unb.c = {-1, 0};
  unb.add_row({1, -1}, Sense::Le, 1);
  CHECK(solve_lp(unb).status == LpStatus::Unbounded);
}

TEST_CASE("negative right-hand sides") {
  // -x - y <= -3 is x + y >= 3
  LinearProgram lp;
  lp.n = 2;
  lp.c = {2, 1};
  lp.add_row({-1, -1}, Sense::Le, -3);
  lp.add_row({1, 0}, Sense::Le, 5);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(3.0));
  CHECK(r.x[1] == doctest::Approx(3.0));
}

TEST_CASE("degenerate vertex does not cycle") {
  // Beale's example cycles under plain Dantzig pricing.
  LinearProgram lp;
  lp.n = 4;
  lp.c = {-0.75, 150, -0.02, 6};
  lp.add_row({0.25, -60, -0.04, 9}, Sense::Le, 0);
  lp.add_row({0.5, -90, -0.02, 3}, Sense::Le, 0);
  lp.add_row({0, 0, 1, 0}, Sense::Le, 1);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-0.05));
}
