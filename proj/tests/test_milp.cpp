#include <doctest.h>

#include <sstream>

#include "clcrc/errors.hpp"
#include "clcrc/milp.hpp"

using namespace clcrc;

namespace {

// max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
MilpInstance knapsack() {
  MilpInstance m;
  const auto a = m.add_column("a", 0, 10, -5, true);
  const auto b = m.add_column("b", 0, 10, -4, true);
  const auto c = m.add_column("c", 0, 10, -3, true);
  m.add_row("r1", -kInf, 5, {{a, 2}, {b, 3}, {c, 1}});
  m.add_row("r2", -kInf, 11, {{a, 4}, {b, 1}, {c, 2}});
  m.add_row("r3", -kInf, 8, {{a, 3}, {b, 4}, {c, 2}});
  return m;
}

}  // namespace

TEST_CASE("small integer program solves to its known optimum") {
  const MilpInstance m = knapsack();
  auto backend = make_backend("highs");
  const SolveResult r = backend->solve(m, {0.0});
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-13.0));
  CHECK(m.evaluate(r.x) == doctest::Approx(-13.0));
  CHECK(m.max_violation(r.x) < 1e-9);
}

TEST_CASE("feasible warm start is accepted and never worsens the result") {
  const MilpInstance m = knapsack();
  auto backend = make_backend("highs");
  const std::vector<double> start = {1, 0, 1};
  CHECK(m.max_violation(start) == 0.0);
  const SolveResult r = backend->solve(m, {0.0}, &start);
  REQUIRE(r.has_solution());
  CHECK(r.warm_start_accepted);
  CHECK(r.objective <= m.evaluate(start) + 1e-9);
}

TEST_CASE("infeasible model reports status and a conflicting subset") {
  MilpInstance m;
  const auto x = m.add_column("x", 0, 10);
  const auto y = m.add_binary("y");
  m.add_row("at_least", 5, kInf, {{x, 1}});
  m.add_row("at_most", -kInf, 3, {{x, 1}});
  m.add_row("unrelated", 0, 1, {{y, 1}});
  auto backend = make_backend("highs");
  const SolveResult r = backend->solve(m, {});
  CHECK(r.status == SolveStatus::Infeasible);
  CHECK_FALSE(r.has_solution());
  const auto& c = r.conflict;
  CHECK(std::find(c.begin(), c.end(), "at_least") != c.end());
  CHECK(std::find(c.begin(), c.end(), "at_most") != c.end());
  CHECK(std::find(c.begin(), c.end(), "unrelated") == c.end());
}

TEST_CASE("violation measure covers bounds, rows and integrality") {
  const MilpInstance m = knapsack();
  CHECK(m.max_violation({0.5, 0, 0}) == doctest::Approx(0.5));
  CHECK(m.max_violation({0, 0, 11}) == doctest::Approx(14.0));
  CHECK(m.binaries() == 3);
}

TEST_CASE("LP export names every row and column") {
  const MilpInstance m = knapsack();
  std::ostringstream out;
  m.write_lp(out);
  const std::string s = out.str();
  for (const char* name : {"r1", "r2", "r3", "a", "b", "c", "General", "End"})
    CHECK(s.find(name) != std::string::npos);
}

TEST_CASE("unknown backend names fail with the available choices") {
  try {
    make_backend("cplex");
    FAIL("expected a SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("highs") != std::string::npos);
  }
}
