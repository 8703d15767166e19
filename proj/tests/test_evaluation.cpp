#include <doctest.h>

#include <atomic>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "clcrc/errors.hpp"
#include "clcrc/evaluation.hpp"
#include "support.hpp"

using namespace clcrc;

namespace {

FleetEnvelope overloaded() {
  FleetEnvelope env(3);
  env.e_hi = {1.0, 4.0, 5.0};
  env.e_lo = {0.0, 1.0, 5.0};
  env.p_max = {4.0, 4.0, 4.0};
  return env;
}

ContractParams overload_params() {
  ContractParams p;
  p.tau = 0;
  p.capacity_limit = 2.0;
  p.p_clc_min = 2.0;
  p.p_clc_max = 4.0;
  p.pi_clc = 1000.0;
  return p;
}

Policy zero_policy(std::size_t hours) {
  Policy p;
  p.clc_reduction.assign(hours, 0.0);
  p.status = SolveStatus::Optimal;
  return p;
}

Realization realization_of(const FleetEnvelope& env, const MarketScenario& m) {
  Realization r;
  r.prognosis_basis = env;
  r.market = m;
  r.recourse_scenarios.scenarios = {env};
  r.recourse_scenarios.probability = {1.0};
  r.realized = env;
  return r;
}

void check_tie_out(const RealizedOutcome& o, const Policy& pol, const Realization& r,
                   const ContractParams& p) {
  double clc = 0.0, rc = 0.0;
  for (double v : pol.clc_reduction) clc += p.pi_clc * v;
  for (std::size_t d = 0; d < o.rc_energy.size(); ++d)
    rc += rc_unit_price(p.pi_rc_sell, r.market.buy_price[d]) * o.rc_energy[d];
  CHECK(std::abs(o.clc_cost - clc) <= 1e-6);
  CHECK(std::abs(o.rc_cost - rc) <= 1e-6);
  CHECK(std::abs(o.total_cost - (o.clc_cost + o.rc_cost)) <= 1e-6);
  CHECK(o.clc_cost >= 0.0);
  CHECK(o.rc_cost >= 0.0);
}

DayInstance tiny_day(std::uint64_t seed) {
  const test::TinyCase tc = test::random_tiny_case(seed);
  DayInstance day;
  day.day = static_cast<UnixSeconds>(seed) * kSecondsPerDay;
  day.tree = tc.tree;
  Realization& r = day.realization;
  r.prognosis_basis = tc.tree.ev_stage1[0];
  r.market = tc.tree.markets[0];
  for (const auto& c : tc.tree.children[0]) {
    r.recourse_scenarios.scenarios.push_back(c.envelope);
    r.recourse_scenarios.probability.push_back(c.probability);
  }
  r.realized = tc.tree.children[0][0].envelope;
  return day;
}

}  // namespace

TEST_CASE("uncongested realization costs nothing") {
  FleetEnvelope env(3);
  env.e_hi = {1.0, 2.0, 2.5};
  env.e_lo = {0.0, 0.5, 2.5};
  env.p_max = {2.0, 2.0, 2.0};
  ContractParams p = overload_params();
  const Realization r = realization_of(env, test::empty_market(3));
  const Policy pol = zero_policy(3);
  const RealizedOutcome o = rollout(pol, r, make_recourse_solver(), p);
  CHECK(o.total_cost == 0.0);
  CHECK_FALSE(o.congested());
  CHECK_FALSE(o.recourse_fallback);
  check_tie_out(o, pol, r, p);
}

TEST_CASE("recourse buys exactly the overload when the market is liquid") {
  const ContractParams p = overload_params();
  MarketScenario m = test::empty_market(3);
  m.buy_volume = {0.0, 5.0, 5.0};
  m.buy_price = {0.0, 90.0, 90.0};
  const Realization r = realization_of(overloaded(), m);
  const Policy pol = zero_policy(3);
  const RealizedOutcome o = rollout(pol, r, make_recourse_solver("highs", {0.0}), p);
  CHECK(o.rc_energy[1] == doctest::Approx(1.0));
  CHECK(o.rc_energy[2] == doctest::Approx(0.0));
  CHECK(o.rc_cost == doctest::Approx(10.0));
  CHECK(o.realized_load.power[1] == doctest::Approx(2.0));
  // Later hours stay capped at the prognosis, so the deferred energy is not
  // recovered at hour 2.
  CHECK(o.unserved_energy == doctest::Approx(1.0));
  CHECK_FALSE(o.congested());
  check_tie_out(o, pol, r, p);
}

TEST_CASE("an illiquid market leaves residual congestion") {
  const ContractParams p = overload_params();
  const Realization r = realization_of(overloaded(), test::empty_market(3));
  const Policy pol = zero_policy(3);
  const RealizedOutcome o = rollout(pol, r, make_recourse_solver(), p);
  CHECK(o.congestion[1] == 1);
  CHECK(o.congested());
  CHECK(o.rc_cost == 0.0);
  CHECK(o.recourse_fallback);
}

TEST_CASE("capacity limitation is applied and costed") {
  const ContractParams p = overload_params();
  const Realization r = realization_of(overloaded(), test::empty_market(3));
  Policy pol = zero_policy(3);
  pol.clc_reduction = {0.0, 2.0, 0.0};
  const RealizedOutcome o = rollout(pol, r, fixed_recourse({0.0, 0.0, 0.0}), p);
  CHECK(o.realized_load.power[1] == doctest::Approx(2.0));
  CHECK(o.clc_cost == doctest::Approx(2000.0));
  CHECK_FALSE(o.congested());
  check_tie_out(o, pol, r, p);
}

TEST_CASE("horizon mismatch is a usage error") {
  const ContractParams p = overload_params();
  const Realization r = realization_of(overloaded(), test::empty_market(3));
  CHECK_THROWS_AS(rollout(zero_policy(4), r, fixed_recourse({}), p), UsageError);
}

TEST_CASE("oracle outcome relieves the overload at the cheaper instrument") {
  const ContractParams p = overload_params();
  MarketScenario m = test::empty_market(3);
  m.buy_volume = {0.0, 5.0, 5.0};
  m.buy_price = {0.0, 90.0, 90.0};
  const RealizedOutcome o = oracle_outcome(overloaded(), m, p, "highs", {0.0});
  CHECK(o.total_cost == doctest::Approx(10.0));
  CHECK(o.clc_cost == 0.0);
  CHECK_FALSE(o.congested());
}

TEST_CASE("congestion frequency per hour") {
  std::vector<RealizedOutcome> days(36);
  for (auto& d : days) d.congestion.assign(24, 0);
  days[3].congestion[18] = 1;
  days[20].congestion[18] = 1;
  for (auto& d : days) d.congestion[5] = 1;
  const auto f = congestion_frequency(days);
  CHECK(f[18] == doctest::Approx(2.0 / 36.0));
  CHECK(std::abs(f[18] - 0.0556) < 5e-5);
  CHECK(f[5] == 1.0);
  CHECK(f[0] == 0.0);
  CHECK_THROWS_AS(congestion_frequency(std::span<const RealizedOutcome>{}), UsageError);
}

TEST_CASE("policy comparison averages costs and checks the oracle bound") {
  std::vector<RealizedOutcome> st(2), orc(2);
  st[0].clc_cost = 100;
  st[0].total_cost = 100;
  st[1].rc_cost = 50;
  st[1].total_cost = 50;
  orc[0].total_cost = orc[0].rc_cost = 30;
  orc[1].total_cost = orc[1].rc_cost = 40;
  const PolicyComparison c = compare_policies(st, orc);
  CHECK(c.stochastic.total == doctest::Approx(75.0));
  CHECK(c.stochastic.clc == doctest::Approx(50.0));
  CHECK(c.oracle.total == doctest::Approx(35.0));
  CHECK(c.oracle_bound_holds);
  CHECK(compare_policies(st, st).oracle_bound_holds);
  CHECK_THROWS_AS(compare_policies(st, std::span<const RealizedOutcome>(orc).first(1)), UsageError);
}

TEST_CASE("parallel_for visits every index once and rethrows the first failure") {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 4, [&](std::size_t i) { ++hits[i]; });
  for (auto& h : hits) CHECK(h.load() == 1);
  try {
    parallel_for(10, 3, [](std::size_t i) {
      if (i == 7 || i == 4) throw std::runtime_error("day " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "day 4");
  }
}

TEST_CASE("stability against itself has zero error and missing cells stay missing") {
  ContractParams params = test::random_tiny_case(1).params;
  const TreeBuilder build = [](std::size_t day, TreeSize size) {
    return test::random_tiny_case(100 * day + size.ev + 10 * size.rc).tree;
  };
  const std::vector<TreeSize> grid = {{1, 1}, {2, 2}};
  const StabilityReport r = in_sample_stability(3, grid, {2, 2}, params, build, {{0.0}});
  REQUIRE(r.cells.size() == 2);
  REQUIRE(r.cells[1].mrae_cost);
  CHECK(*r.cells[1].mrae_cost == 0.0);
  if (r.cells[1].mrae_probability) CHECK(*r.cells[1].mrae_probability == 0.0);
  for (const auto& c : r.cells) {
    if (c.mrae_cost) CHECK(*c.mrae_cost >= 0.0);
  }
  const std::vector<TreeSize> too_big = {{3, 1}};
  CHECK_THROWS_AS(in_sample_stability(3, too_big, {2, 2}, params, build), UsageError);
}

TEST_CASE("epsilon sweep is monotone and its small end matches the robust policy") {
  std::vector<DayInstance> days;
  for (std::uint64_t s = 1; s <= 6; ++s) days.push_back(tiny_day(s));
  const ContractParams params = test::random_tiny_case(1).params;
  const EvaluationSettings settings{{0.0}};
  const auto rows = epsilon_sweep(days, {0.3, 1e-4, 0.1}, params, settings);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].epsilon == 1e-4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].mean_objective);
    CHECK(*rows[i].mean_objective <= *rows[i - 1].mean_objective + 1e-9);
  }
  auto backend = make_backend("highs");
  double robust = 0.0;
  for (const auto& d : days) robust += warm_start_zero_tolerance(d.tree, params, *backend, {0.0}).objective / 6.0;
  CHECK(*rows[0].mean_objective == doctest::Approx(robust).epsilon(1e-6));
  CHECK_THROWS_AS(epsilon_sweep(days, {0.0}, params), UsageError);
}

TEST_CASE("evaluated days respect the oracle bound and write deterministic reports") {
  std::vector<DayInstance> days;
  for (std::uint64_t s = 1; s <= 8; ++s) days.push_back(tiny_day(s));
  const ContractParams params = test::random_tiny_case(1).params;
  const EvaluationSettings settings{{0.0}, "highs", 2};
  const auto a = evaluate_days(days, params, settings);
  const auto b = evaluate_days(days, params, settings);
  std::vector<RealizedOutcome> st, orc;
  for (const auto& r : a) {
    st.push_back(r.stochastic);
    orc.push_back(r.oracle);
    for (double v : r.in_sample_violation) CHECK(v <= params.epsilon + 1e-12);
  }
  CHECK(compare_policies(st, orc).oracle_bound_holds);
  std::ostringstream x, y;
  write_outcomes_csv(x, a);
  write_frequency_csv(x, a);
  write_outcomes_csv(y, b);
  write_frequency_csv(y, b);
  CHECK(x.str() == y.str());
  CHECK(summary_json(a, params).dump() == summary_json(b, params).dump());
}

TEST_CASE("numbers are printed with fixed precision") {
  CHECK(format_number(1.0 / 3.0) == "0.333333");
  CHECK(format_number(-0.0) == "0.000000");
  CHECK(format_number(2.5, 2) == "2.50");
}
