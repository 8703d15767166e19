#include <doctest.h>

#include <cmath>

#include "clcrc/decision_model.hpp"
#include "brute_force.hpp"
#include "clcrc/errors.hpp"
#include "support.hpp"

using namespace clcrc;

TEST_CASE("rc unit price is the nonnegative spread") {
  CHECK(rc_unit_price(100.0, -5.0) == doctest::Approx(105.0));
  CHECK(rc_unit_price(100.0, 120.0) == 0.0);
  CHECK(rc_unit_price(100.0, 100.0) == 0.0);
}

TEST_CASE("single overloaded hour is relieved by capacity limitation alone") {
  FleetEnvelope env(2);
  env.e_hi = {3.0, 3.0};
  env.e_lo = {0.0, 2.0};
  env.p_max = {3.0, 3.0};
  ContractParams p;
  p.tau = -12;
  p.capacity_limit = 2.0;
  p.p_clc_min = 2.0;
  p.p_clc_max = 3.0;
  p.epsilon = 0.5;
  const ScenarioTree tree = test::single_scenario_tree(env, test::empty_market(2), p.tau);
  auto backend = make_backend("highs");
  const Policy pol = solve_tree(tree, p, *backend, {0.0});
  REQUIRE(pol.ok());
  CHECK(pol.clc_reduction[0] == doctest::Approx(1.0));
  CHECK(pol.clc_reduction[1] == doctest::Approx(0.0));
  CHECK(pol.objective == doctest::Approx(100.0));
}

TEST_CASE("no congestion gives the zero policy") {
  FleetEnvelope env(3);
  env.e_hi = {1.0, 2.0, 2.5};
  env.e_lo = {0.0, 0.5, 2.5};
  env.p_max = {2.0, 2.0, 2.0};
  ContractParams p;
  p.tau = 0;
  p.capacity_limit = 2.0;
  p.p_clc_min = 2.0;
  p.p_clc_max = 2.0;
  const ScenarioTree tree = test::single_scenario_tree(env, test::empty_market(3), p.tau);
  CHECK(prefilter_congestion_free_hours(tree, p).size() == 3);
  auto backend = make_backend("highs");
  const Policy pol = solve_tree(tree, p, *backend, {0.0});
  REQUIRE(pol.ok());
  CHECK(pol.objective == 0.0);
  for (double v : pol.clc_reduction) CHECK(v == 0.0);
}

TEST_CASE("cheap liquid market makes redispatch the only instrument used") {
  FleetEnvelope env(3);
  env.e_hi = {1.0, 4.0, 5.0};
  env.e_lo = {0.0, 1.0, 5.0};
  env.p_max = {4.0, 4.0, 4.0};
  ContractParams p;
  p.tau = 0;
  p.capacity_limit = 2.0;
  p.p_clc_min = 2.0;
  p.p_clc_max = 4.0;
  p.pi_clc = 1000.0;
  MarketScenario m = test::empty_market(3);
  m.buy_volume = {0.0, 5.0, 5.0};
  m.buy_price = {0.0, 90.0, 90.0};  // spread 10
  const ScenarioTree tree = test::single_scenario_tree(env, m, p.tau);
  auto backend = make_backend("highs");
  const Policy pol = oracle_solve(env, m, p, *backend, {0.0});
  REQUIRE(pol.ok());
  CHECK(pol.clc_cost(p) == 0.0);
  // Fast load at hour 1 is 3 MW; 1 MWh of redispatch brings it to L, and
  // the deferred energy fits under L at hour 2.
  CHECK(pol.rc_energy[0][1] == doctest::Approx(1.0));
  CHECK(pol.objective == doctest::Approx(10.0));
  const auto viol = in_sample_violation(tree, p, pol);
  for (double v : viol) CHECK(v == 0.0);
}

TEST_CASE("modelled loads agree with the fleet response on random trees") {
  auto backend = make_backend("highs");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const test::TinyCase tc = test::random_tiny_case(seed);
    const Policy pol = solve_tree(tc.tree, tc.params, *backend, {1e-6});
    REQUIRE(pol.ok());
    const PolicyLoads loads = evaluate_policy_loads(tc.tree, tc.params, pol);
    for (std::size_t i = 0; i < tc.tree.nodes.size(); ++i) {
      const auto& s1 = loads.stage1[tc.tree.nodes[i].ev];
      for (std::size_t d = 0; d < tc.tree.hours; ++d) {
        CHECK(pol.prognosis[i][d] == doctest::Approx(s1.power[d]).epsilon(1e-5));
      }
      for (std::size_t j = 0; j < loads.leaves[i].size(); ++j) {
        for (std::size_t d : tc.tree.d_plus) {
          CHECK(pol.leaf_load[i][j][d] ==
                doctest::Approx(loads.leaves[i][j].power[d]).epsilon(1e-5));
        }
      }
    }
    for (double v : in_sample_violation(tc.tree, tc.params, pol)) {
      CHECK(v <= tc.params.epsilon + 1e-12);
    }
  }
}

namespace {

// One EV scenario over 24 hours whose fast load exceeds `limit` only at hour 18.
FleetEnvelope peak_at_18(double peak, double limit) {
  FleetEnvelope env(24);
  double e = 0.0;
  for (std::size_t d = 0; d < 24; ++d) {
    e += d == 18 ? peak : 0.25 * limit;
    env.e_hi[d] = e;
    env.p_max[d] = std::max(peak, limit);
  }
  env.e_lo = env.e_hi;
  for (std::size_t d = 0; d + 1 < 24; ++d) env.e_lo[d] = std::max(0.0, env.e_hi[23] - limit * static_cast<double>(23 - d));
  return env;
}

}  // namespace

TEST_CASE("prefilter keeps every hour but the congested one") {
  ContractParams p;
  p.tau = 12;
  p.capacity_limit = 2.0;
  p.p_clc_min = 2.0;
  p.p_clc_max = 3.0;
  const FleetEnvelope env = peak_at_18(3.0, 2.0);
  REQUIRE(check_envelope(env).empty());
  const ScenarioTree tree = test::single_scenario_tree(env, test::empty_market(24), p.tau);
  const auto free = prefilter_congestion_free_hours(tree, p);
  CHECK(free.size() == 23);
  CHECK(free.count(18) == 0);

  ScenarioTree empty = tree;
  empty.ev_stage1.clear();
  empty.nodes.clear();
  empty.children.clear();
  empty.hours = 0;
  CHECK(prefilter_congestion_free_hours(empty, p).empty());
}

TEST_CASE("zero-tolerance warm start covers the worst scenario") {
  ContractParams p;
  p.tau = -12;
  p.capacity_limit = 2.0;
  p.p_clc_min = 2.0;
  p.p_clc_max = 3.5;
  EvScenarioSet s1;
  s1.scenarios = {peak_at_18(2.5, 2.0), peak_at_18(3.5, 2.0)};
  s1.probability = {0.5, 0.5};
  const ScenarioTree tree = build_tree(s1, {test::empty_market(24)}, shared_stage_two(s1), p.tau);
  auto backend = make_backend("highs");
  const Policy w = warm_start_zero_tolerance(tree, p, *backend, {0.0});
  REQUIRE(w.ok());
  CHECK(w.clc_reduction[18] == doctest::Approx(1.5));
  CHECK(w.objective == doctest::Approx(150.0));
  // The robust policy is feasible for the chance-constrained problem, whose
  // optimum can only be cheaper.
  for (double v : in_sample_violation(tree, p, w)) CHECK(v == 0.0);
  p.epsilon = 0.6;
  const Policy pol = solve_tree(tree, p, *backend, {0.0});
  REQUIRE(pol.ok());
  CHECK(pol.objective <= w.objective + 1e-6);
  for (double v : in_sample_violation(tree, p, pol)) CHECK(v <= p.epsilon);
}

TEST_CASE("unreachable limit is reported as infeasible") {
  ContractParams p;
  p.tau = -12;
  p.capacity_limit = 1.0;
  p.p_clc_min = 1.0;
  p.p_clc_max = 3.0;
  FleetEnvelope env(2);
  env.e_hi = {3.0, 3.0};
  env.e_lo = {3.0, 3.0};  // all energy due in hour 0
  env.p_max = {3.0, 3.0};
  const ScenarioTree tree = test::single_scenario_tree(env, test::empty_market(2), p.tau);
  auto backend = make_backend("highs");
  const Policy pol = solve_tree(tree, p, *backend, {0.0});
  CHECK(pol.status == SolveStatus::Infeasible);
  CHECK_FALSE(pol.ok());
  const Policy w = warm_start_zero_tolerance(tree, p, *backend, {0.0});
  CHECK_FALSE(w.warnings.empty());
}

TEST_CASE("contract parameter invariants are enforced") {
  ContractParams p;
  p.capacity_limit = 2.0;
  p.p_clc_min = 2.0;
  p.p_clc_max = 3.0;
  CHECK_NOTHROW(p.validate());
  ContractParams bad = p;
  bad.epsilon = 1.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = p;
  bad.p_clc_min = 2.5;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = p;
  bad.p_rc_min = 0.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = p;
  bad.big_m = 1.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  CHECK(ContractParams::from_json(p.to_json()) == p);
}

TEST_CASE("scaling both prices scales the optimum") {
  auto backend = make_backend("highs");
  for (std::uint64_t seed = 21; seed <= 25; ++seed) {
    test::TinyCase tc = test::random_tiny_case(seed);
    const Policy a = solve_tree(tc.tree, tc.params, *backend, {0.0});
    tc.params.pi_clc *= 3.0;
    tc.params.pi_rc_sell *= 3.0;
    for (auto& m : tc.tree.markets)
      for (double& v : m.buy_price) v *= 3.0;
    const Policy b = solve_tree(tc.tree, tc.params, *backend, {0.0});
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(b.objective == doctest::Approx(3.0 * a.objective).epsilon(1e-6));
    CHECK(policy_cost(tc.tree, tc.params, a) == doctest::Approx(b.objective).epsilon(1e-6));
  }
}

TEST_CASE("optimal cost does not increase with epsilon") {
  auto backend = make_backend("highs");
  for (std::uint64_t seed = 31; seed <= 35; ++seed) {
    test::TinyCase tc = test::random_tiny_case(seed);
    double prev = kInf;
    for (double eps : {0.01, 0.1, 0.3, 0.6}) {
      tc.params.epsilon = eps;
      const Policy pol = solve_tree(tc.tree, tc.params, *backend, {0.0});
      REQUIRE(pol.ok());
      CHECK(pol.objective <= prev + 1e-6);
      prev = pol.objective;
    }
  }
}

TEST_CASE("exact solves match the exhaustive grid on tiny trees") {
  auto backend = make_backend("highs");
  for (std::uint64_t seed = 41; seed <= 45; ++seed) {
    const test::TinyCase tc = test::random_tiny_case(seed);
    const Policy pol = solve_tree(tc.tree, tc.params, *backend, {0.0});
    const test::GridResult g = test::grid_search(tc.tree, tc.params, 0.05);
    REQUIRE(pol.ok());
    CHECK(pol.objective == doctest::Approx(g.objective).epsilon(1e-6));
  }
}

TEST_CASE("oracle pays nothing when the realization stays below the limit") {
  FleetEnvelope env(3);
  env.e_hi = {1.0, 2.0, 2.5};
  env.e_lo = {0.0, 0.5, 2.5};
  env.p_max = {2.0, 2.0, 2.0};
  ContractParams p;
  p.tau = 0;
  p.capacity_limit = 2.0;
  p.p_clc_min = 2.0;
  p.p_clc_max = 2.0;
  auto backend = make_backend("highs");
  const Policy pol = oracle_solve(env, test::empty_market(3), p, *backend, {0.0});
  REQUIRE(pol.ok());
  CHECK(pol.objective == 0.0);
}

TEST_CASE("policy survives a JSON round trip") {
  auto backend = make_backend("highs");
  const test::TinyCase tc = test::random_tiny_case(3);
  const Policy pol = solve_tree(tc.tree, tc.params, *backend, {0.0});
  const Policy back = Policy::from_json(pol.to_json());
  CHECK(back.to_json() == pol.to_json());
  CHECK(back.clc_reduction == pol.clc_reduction);
  CHECK(back.status == pol.status);
}
