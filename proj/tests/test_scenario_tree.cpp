#include <doctest.h>

#include <numeric>

#include "clcrc/errors.hpp"
#include "clcrc/scenario_tree.hpp"

using namespace clcrc;

namespace {

FleetEnvelope ramp(double step) {
  FleetEnvelope env(24);
  for (std::size_t d = 0; d < 24; ++d) {
    env.e_hi[d] = step * static_cast<double>(d + 1);
    env.e_lo[d] = d == 23 ? env.e_hi[d] : std::max(0.0, env.e_hi[d] - 3 * step);
    env.p_max[d] = 4 * step;
  }
  repair_envelope(env);
  return env;
}

EvScenarioSet set_of(std::vector<FleetEnvelope> envs) {
  EvScenarioSet s;
  s.probability.assign(envs.size(), 1.0 / static_cast<double>(envs.size()));
  s.scenarios = std::move(envs);
  return s;
}

MarketScenario market(double p) {
  MarketScenario m;
  m.buy_volume.assign(24, 1.0);
  m.buy_price.assign(24, -5.0);
  m.probability = p;
  return m;
}

}  // namespace

TEST_CASE("first-stage probabilities are the independent product") {
  const EvScenarioSet s1 = set_of({ramp(0.1), ramp(0.2)});
  const ScenarioTree t = build_tree(s1, {market(0.3), market(0.7)}, shared_stage_two(s1), 9);
  REQUIRE(t.nodes.size() == 4);
  std::vector<double> p;
  for (const auto& n : t.nodes) p.push_back(n.probability);
  std::sort(p.begin(), p.end());
  CHECK(p[0] == doctest::Approx(0.15));
  CHECK(p[1] == doctest::Approx(0.15));
  CHECK(p[2] == doctest::Approx(0.35));
  CHECK(p[3] == doctest::Approx(0.35));
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
  CHECK(t.leaf_count() == 8);
  validate_tree(t);
}

TEST_CASE("hour split around tau") {
  const HourSplit nine = split_hours(9);
  CHECK(nine.d_minus.size() == 10);
  CHECK(nine.d_minus.back() == 9);
  CHECK(nine.d_plus.front() == 10);
  CHECK(nine.d_plus.back() == 23);
  CHECK(split_hours(-12).d_minus.empty());
  CHECK(split_hours(-12).d_plus.size() == 24);
  CHECK(split_hours(23).d_plus.empty());
  for (int tau = kMinTau; tau <= kMaxTau; ++tau) {
    const HourSplit s = split_hours(tau);
    std::vector<std::size_t> all = s.d_minus;
    all.insert(all.end(), s.d_plus.begin(), s.d_plus.end());
    CHECK(all.size() == 24);
    for (std::size_t d = 0; d < all.size(); ++d) CHECK(all[d] == d);
  }
}

TEST_CASE("tau outside the supported range is refused") {
  const EvScenarioSet s1 = set_of({ramp(0.1)});
  CHECK_THROWS_AS(build_tree(s1, {market(1.0)}, shared_stage_two(s1), -13), UsageError);
  CHECK_THROWS_AS(build_tree(s1, {market(1.0)}, shared_stage_two(s1), 24), UsageError);
}

TEST_CASE("tau 23 degenerates to a single stage with a warning") {
  const EvScenarioSet s1 = set_of({ramp(0.1)});
  const ScenarioTree t = build_tree(s1, {market(1.0)}, shared_stage_two(s1), 23);
  CHECK(t.d_plus.empty());
  CHECK_FALSE(t.warnings.empty());
}

TEST_CASE("children follow the parent up to tau and leaf mass sums to one") {
  const EvScenarioSet s1 = set_of({ramp(0.1), ramp(0.3)});
  const EvScenarioSet s2 = set_of({ramp(0.15), ramp(0.2), ramp(0.25)});
  const ScenarioTree t = build_tree(s1, {market(0.5), market(0.5)}, shared_stage_two(s2), 12);
  double mass = 0.0;
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const FleetEnvelope& parent = t.ev_stage1[t.nodes[i].ev];
    REQUIRE(t.children_of(i).size() == 3);
    for (const auto& c : t.children_of(i)) {
      mass += t.nodes[i].probability * c.probability;
      for (std::size_t d = 0; d <= 12; ++d) CHECK(c.envelope.e_hi[d] == doctest::Approx(parent.e_hi[d]));
      CHECK(check_envelope(c.envelope, 1e-9).empty());
    }
  }
  CHECK(mass == doctest::Approx(1.0));
}

TEST_CASE("tree round-trips through JSON") {
  const EvScenarioSet s1 = set_of({ramp(0.1), ramp(0.2)});
  const ScenarioTree t = build_tree(s1, {market(0.4), market(0.6)}, shared_stage_two(s1), 3);
  const ScenarioTree back = ScenarioTree::from_json(t.to_json());
  CHECK(back.to_json() == t.to_json());
  CHECK(back.markets == t.markets);
}

TEST_CASE("invalid component probabilities are refused") {
  EvScenarioSet s1 = set_of({ramp(0.1), ramp(0.2)});
  s1.probability = {0.5, 0.6};
  CHECK_THROWS(build_tree(s1, {market(1.0)}, shared_stage_two(set_of({ramp(0.1)})), 3));
}
